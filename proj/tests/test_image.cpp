// SPDX-License-Identifier: Apache-2.0

#include "egoqr/error.hpp"
#include "egoqr/image.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

namespace egoqr {
namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s)
{
    return {s.begin(), s.end()};
}

TEST(Pgm, LoadsBinaryPayload)
{
    auto bytes = bytes_of("P5\n2 2\n255\n");
    bytes.insert(bytes.end(), {0, 255, 128, 7});
    auto img = load_pgm(bytes);
    ASSERT_EQ(img.width(), 2);
    ASSERT_EQ(img.height(), 2);
    EXPECT_EQ(img(0, 0), 0);
    EXPECT_EQ(img(1, 0), 255);
    EXPECT_EQ(img(0, 1), 128);
    EXPECT_EQ(img(1, 1), 7);
    EXPECT_EQ(save_pgm(img), bytes);
}

TEST(Pgm, AcceptsCommentsInHeader)
{
    auto bytes = bytes_of("P5 # made by hand\n3 1\n# another\n255\n");
    bytes.insert(bytes.end(), {1, 2, 3});
    auto img = load_pgm(bytes);
    EXPECT_EQ(img.width(), 3);
    EXPECT_EQ(img(2, 0), 3);
}

TEST(Pgm, CanonicalHeaderOnSave)
{
    GrayImage one(1, 1, 0);
    auto expected = bytes_of("P5\n1 1\n255\n");
    expected.push_back(0);
    EXPECT_EQ(save_pgm(one), expected);

    GrayImage two(2, 1, std::vector<std::uint8_t>{10, 20});
    expected = bytes_of("P5\n2 1\n255\n");
    expected.insert(expected.end(), {0x0A, 0x14});
    EXPECT_EQ(save_pgm(two), expected);
}

TEST(Pgm, RejectsMalformedInput)
{
    EXPECT_THROW(load_pgm(bytes_of("P2\n2 2\n255\n0 1 2 3\n")), FormatError);
    EXPECT_THROW(load_pgm(bytes_of("P5\n2 2\n65535\n\x01\x02\x03\x04\x05\x06\x07\x08")), FormatError);
    EXPECT_THROW(load_pgm(bytes_of("P5\n2 2\n255\n\x01\x02")), FormatError);
    EXPECT_THROW(load_pgm(bytes_of("P5\n2\n")), FormatError);
    EXPECT_THROW(load_pgm(bytes_of("P5\n0 2\n255\n")), FormatError);
    EXPECT_THROW(load_pgm(bytes_of("GIF89a")), FormatError);
    EXPECT_THROW(load_pgm(bytes_of("")), FormatError);
}

TEST(Pgm, RoundTripProperty)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto img = testing::random_image(rng);
        auto bytes = save_pgm(img);
        EXPECT_EQ(load_pgm(bytes), img);
        EXPECT_EQ(save_pgm(load_pgm(bytes)), bytes);
    }
}

TEST(Invert, AppliesComplement)
{
    GrayImage zeros(3, 2, 0);
    auto inv = invert(zeros);
    for (auto p : inv.pixels())
        EXPECT_EQ(p, 255);
    GrayImage hundred(1, 1, 100);
    EXPECT_EQ(invert(hundred)(0, 0), 155);
}

TEST(Invert, IsAnInvolution)
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        auto img = testing::random_image(rng);
        EXPECT_EQ(invert(invert(img)), img);
    }
}

// Independent scalar bilinear evaluation for one output pixel, as an exact fraction num / den
// (tent weights over every source pixel).
std::pair<long long, long long> bilinear_oracle(const GrayImage& img, int nw, int nh, int x, int y)
{
    auto coord = [](int i, int n_out, int n_in) {
        return n_out == 1 ? std::pair<long long, long long>{n_in - 1, 2}
                          : std::pair<long long, long long>{static_cast<long long>(i) * (n_in - 1), n_out - 1};
    };
    auto [px, dx] = coord(x, nw, img.width());
    auto [py, dy] = coord(y, nh, img.height());
    long long acc = 0;
    for (int yy = 0; yy < img.height(); ++yy)
        for (int xx = 0; xx < img.width(); ++xx) {
            long long wx = std::max(0LL, dx - std::llabs(px - xx * dx));
            long long wy = std::max(0LL, dy - std::llabs(py - yy * dy));
            acc += wx * wy * img(xx, yy);
        }
    return {acc, dx * dy};
}

long long round_half_up(std::pair<long long, long long> f)
{
    return (2 * f.first + f.second) / (2 * f.second);
}

TEST(Resize, SameSizeIsIdentity)
{
    std::mt19937_64 rng(3);
    auto img = testing::random_image(rng);
    EXPECT_EQ(resize(img, img.width(), img.height()), img);
}

TEST(Resize, ConstantStaysConstant)
{
    GrayImage img(7, 5, 93);
    for (auto [w, h] : {std::pair{1, 1}, {3, 9}, {14, 10}, {100, 2}}) {
        auto out = resize(img, w, h);
        for (auto p : out.pixels())
            EXPECT_EQ(p, 93);
    }
}

TEST(Resize, CheckerboardCenterRoundsHalfAway)
{
    GrayImage img(2, 2, std::vector<std::uint8_t>{0, 255, 255, 0});
    auto out = resize(img, 3, 3);
    auto [num, den] = bilinear_oracle(img, 3, 3, 1, 1);
    EXPECT_EQ(num * 2, den * 255); // exactly 127.5
    EXPECT_EQ(out(1, 1), 128);
    EXPECT_EQ(out(0, 0), 0);
    EXPECT_EQ(out(2, 0), 255);
    EXPECT_EQ(out(1, 0), 128);
}

TEST(Resize, MatchesScalarOracleAndEnvelope)
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int i = 0; i < 60; ++i) {
        auto img = testing::random_image(rng, 20);
        int nw = dim(rng), nh = dim(rng);
        auto out = resize(img, nw, nh);
        auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
        for (int y = 0; y < nh; ++y)
            for (int x = 0; x < nw; ++x) {
                EXPECT_EQ(out(x, y), round_half_up(bilinear_oracle(img, nw, nh, x, y)));
                EXPECT_GE(out(x, y), *lo);
                EXPECT_LE(out(x, y), *hi);
            }
    }
    GrayImage img(4, 4);
    EXPECT_THROW(resize(img, 0, 3), GeometryError);
}

TEST(Luma, Bt601RoundsHalfUp)
{
    EXPECT_EQ(luma_bt601(255, 255, 255), 255);
    EXPECT_EQ(luma_bt601(0, 0, 0), 0);
    EXPECT_EQ(luma_bt601(255, 0, 0), 76); // 76.245
    EXPECT_EQ(luma_bt601(0, 255, 0), 150); // 149.685
    EXPECT_EQ(luma_bt601(0, 0, 255), 29); // 29.07
}

TEST(Luma, PpmReducesToGray)
{
    auto bytes = bytes_of("P6\n2 1\n255\n");
    bytes.insert(bytes.end(), {255, 0, 0, 10, 20, 30});
    auto img = load_pnm_as_gray(bytes);
    ASSERT_EQ(img.width(), 2);
    EXPECT_EQ(img(0, 0), 76);
    EXPECT_EQ(img(1, 0), luma_bt601(10, 20, 30));
    EXPECT_THROW(load_pgm(bytes), FormatError);

    auto gray = bytes_of("P5\n1 1\n255\n");
    gray.push_back(42);
    EXPECT_EQ(load_pnm_as_gray(gray)(0, 0), 42);
    bytes.pop_back();
    EXPECT_THROW(load_pnm_as_gray(bytes), FormatError);
}

TEST(Crop, FullImageBoxIsClamped)
{
    GrayImage img(40, 30, 9);
    auto crop = crop_with_margin(img, {0, 0, 39, 29});
    EXPECT_EQ(crop.patch, img);
    EXPECT_EQ(crop.source, (BoundingBox{0, 0, 39, 29}));
}

TEST(Crop, PadsByRoundedFraction)
{
    GrayImage img(400, 400, 1);
    auto crop = crop_with_margin(img, {150, 150, 249, 249}, {0.125, 8});
    // 0.125 * 100 = 12.5 -> 13 px per side
    EXPECT_EQ(crop.patch.width(), 126);
    EXPECT_EQ(crop.patch.height(), 126);
    EXPECT_EQ(crop.source, (BoundingBox{137, 137, 262, 262}));
}

TEST(Crop, MinimumPadApplies)
{
    GrayImage img(100, 100, 1);
    auto crop = crop_with_margin(img, {40, 40, 59, 59});
    EXPECT_EQ(crop.source, (BoundingBox{32, 32, 67, 67}));
}

TEST(Crop, CornerBoxClampsTwoSides)
{
    GrayImage img(300, 200);
    for (int y = 0; y < 200; ++y)
        for (int x = 0; x < 300; ++x)
            img(x, y) = static_cast<std::uint8_t>((x + 3 * y) & 0xFF);
    auto crop = crop_with_margin(img, {0, 0, 99, 99});
    EXPECT_EQ(crop.source, (BoundingBox{0, 0, 112, 112}));
    EXPECT_EQ(crop.patch.width(), 113);
    EXPECT_EQ(crop.patch(5, 7), img(5, 7));
    EXPECT_EQ(crop.patch(112, 112), img(112, 112));
}

TEST(Crop, OutsideBoxThrows)
{
    GrayImage img(50, 50);
    EXPECT_THROW(crop_with_margin(img, {60, 60, 70, 70}), GeometryError);
    EXPECT_THROW(crop_with_margin(img, {10, 10, 5, 20}), GeometryError);
}

TEST(Crop, AlwaysInsideSource)
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> c(-50, 150);
    GrayImage img(100, 80);
    for (int i = 0; i < 500; ++i) {
        BoundingBox b{c(rng), c(rng), 0, 0};
        b.x_max = b.x_min + std::uniform_int_distribution<int>(0, 120)(rng);
        b.y_max = b.y_min + std::uniform_int_distribution<int>(0, 120)(rng);
        if (!clamp_to(b, img.width(), img.height()))
            continue;
        auto crop = crop_with_margin(img, b);
        EXPECT_GE(crop.source.x_min, 0);
        EXPECT_GE(crop.source.y_min, 0);
        EXPECT_LT(crop.source.x_max, img.width());
        EXPECT_LT(crop.source.y_max, img.height());
        EXPECT_EQ(crop.patch.width(), crop.source.width());
        EXPECT_EQ(crop.patch.height(), crop.source.height());
    }
}

TEST(RayBox, Examples)
{
    Ray diag({0, 0}, {std::sqrt(2.0) / 2, std::sqrt(2.0) / 2});
    auto t = intersect_ray_box(diag, {2, 2, 4, 4});
    ASSERT_TRUE(t);
    EXPECT_NEAR(*t, 2 * std::sqrt(2.0), 1e-12);

    Ray inside({3, 3}, {1, 0});
    EXPECT_EQ(intersect_ray_box(inside, {2, 2, 4, 4}), 0.0);

    Ray away({0, 0}, {-1, -1});
    EXPECT_FALSE(intersect_ray_box(away, {2, 2, 4, 4}));

    Ray axis({0, 3}, {1, 0});
    EXPECT_NEAR(*intersect_ray_box(axis, {2, 2, 4, 4}), 2.0, 1e-12);
    Ray grazing({0, 4}, {1, 0});
    EXPECT_NEAR(*intersect_ray_box(grazing, {2, 2, 4, 4}), 2.0, 1e-12);
    Ray miss({0, 4.5}, {1, 0});
    EXPECT_FALSE(intersect_ray_box(miss, {2, 2, 4, 4}));

    EXPECT_THROW(Ray({0, 0}, {0, 0}), GeometryError);
    EXPECT_NEAR(std::hypot(Ray({1, 1}, {3, 4}).direction().x, Ray({1, 1}, {3, 4}).direction().y), 1.0, 1e-6);
}

std::optional<double> march_oracle(const Ray& ray, const BoundingBox& box)
{
    const double step = 1e-3;
    double far = 0;
    for (PointF c : {PointF{double(box.x_min), double(box.y_min)}, PointF{double(box.x_max), double(box.y_max)},
                     PointF{double(box.x_min), double(box.y_max)}, PointF{double(box.x_max), double(box.y_min)}})
        far = std::max(far, distance(ray.origin(), c));
    for (double t = 0; t <= far + step; t += step)
        if (box.contains(ray.at(t)))
            return t;
    return std::nullopt;
}

TEST(RayBox, AgreesWithRayMarchOracle)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(0, 40), angle(0, 2 * M_PI);
    std::uniform_int_distribution<int> corner(0, 35), ext(0, 12);
    int hits = 0;
    for (int i = 0; i < 1000; ++i) {
        BoundingBox box{corner(rng), corner(rng), 0, 0};
        box.x_max = box.x_min + ext(rng);
        box.y_max = box.y_min + ext(rng);
        PointF origin{coord(rng), coord(rng)};
        double a = angle(rng);
        PointF dir{std::cos(a), std::sin(a)};
        if (i % 2) { // aim at a point of the box so that about half the cases hit
            std::uniform_real_distribution<double> u(0, 1);
            dir = PointF{box.x_min + u(rng) * (box.x_max - box.x_min), box.y_min + u(rng) * (box.y_max - box.y_min)} - origin;
            if (std::hypot(dir.x, dir.y) < 1e-9)
                continue;
        }
        Ray ray(origin, dir);
        auto fast = intersect_ray_box(ray, box);
        auto slow = march_oracle(ray, box);
        // the march can only miss a chord shorter than its step
        if (fast && !slow) {
            EXPECT_FALSE(box.contains(ray.at(*fast + 2e-3))) << "case " << i;
            continue;
        }
        ASSERT_EQ(fast.has_value(), slow.has_value()) << "case " << i;
        if (fast) {
            ++hits;
            EXPECT_NEAR(*fast, *slow, 2e-3);
        }
    }
    EXPECT_GT(hits, 100);
}

TEST(Geometry, IouAndBoundingBox)
{
    BoundingBox a{0, 0, 9, 9}, b{5, 0, 14, 9};
    EXPECT_NEAR(iou(a, b), 50.0 / 150.0, 1e-12);
    EXPECT_EQ(iou(a, {20, 20, 30, 30}), 0.0);
    EXPECT_EQ(iou(a, a), 1.0);
    std::vector<PointF> pts{{2.5, 3.0}, {10.0, 7.2}};
    EXPECT_EQ(bounding_box_of(pts), (BoundingBox{2, 3, 9, 7}));
}

TEST(StructuringElementTest, ShapeRules)
{
    auto k = StructuringElement::rectangle(3, 3);
    EXPECT_EQ(k.offsets().size(), 9u);
    EXPECT_THROW(StructuringElement::rectangle(2, 3), GeometryError);
    bool none[9] = {};
    EXPECT_THROW(StructuringElement(3, 3, none), GeometryError);
    bool arm[3] = {true, true, false};
    StructuringElement line(3, 1, arm);
    auto r = line.reflected();
    ASSERT_EQ(r.offsets().size(), 2u);
    EXPECT_EQ(r.offsets()[0], (std::pair{0, 0}));
    EXPECT_EQ(r.offsets()[1], (std::pair{1, 0}));
}

} // namespace
} // namespace egoqr
