// SPDX-License-Identifier: Apache-2.0

#include "egoqr/enhance.hpp"
#include "egoqr/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

namespace egoqr {
namespace {

TEST(Otsu, HalfBlackHalfWhitePicksSmallestTie)
{
    std::vector<std::uint8_t> px(100, 0);
    std::fill(px.begin() + 50, px.end(), 255);
    auto r = otsu_threshold(GrayImage(10, 10, px));
    EXPECT_EQ(r.threshold, 0);
    EXPECT_FALSE(r.degenerate);
    EXPECT_EQ(testing::otsu_oracle(GrayImage(10, 10, px)), 0);
}

TEST(Otsu, ConstantImageIsDegenerate)
{
    auto r = otsu_threshold(GrayImage(9, 4, 77));
    EXPECT_EQ(r.threshold, 77);
    EXPECT_TRUE(r.degenerate);
    auto bin = binarize_otsu(GrayImage(9, 4, 77));
    for (auto p : bin.pixels())
        EXPECT_EQ(p, 0);
}

TEST(Otsu, MatchesExhaustiveOracleOnRandomImages)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        auto img = testing::random_image(rng, 24);
        if (i % 3 == 0) // narrow value ranges produce many near-ties
            for (auto& p : img.pixels())
                p = static_cast<std::uint8_t>(100 + p % 5);
        ASSERT_EQ(otsu_threshold(img).threshold, testing::otsu_oracle(img)) << "image " << i;
    }
}

TEST(Otsu, MatchesOracleOnAdversarialImages)
{
    for (const auto& img : testing::otsu_adversarial_images())
        EXPECT_EQ(otsu_threshold(img).threshold, testing::otsu_oracle(img));
}

TEST(Otsu, BinarizeBimodalIsUnchanged)
{
    GrayImage img(4, 1, std::vector<std::uint8_t>{0, 255, 255, 0});
    EXPECT_EQ(binarize_otsu(img), img);
}

TEST(Otsu, RampBecomesStepAtOracleThreshold)
{
    std::vector<std::uint8_t> ramp(256);
    std::iota(ramp.begin(), ramp.end(), 0);
    GrayImage img(256, 1, ramp);
    int t = testing::otsu_oracle(img);
    auto out = binarize_otsu(img);
    for (int x = 0; x < 256; ++x)
        EXPECT_EQ(out(x, 0), x <= t ? 0 : 255);
    EXPECT_EQ(t, 127);
}

TEST(ClipHistogram, PreservesMassAndBoundsBins)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> spike(0, 5000), small(0, 20), pick(0, 255);
    for (int trial = 0; trial < 500; ++trial) {
        Histogram h{};
        for (auto& b : h)
            b = small(rng);
        for (int s = 0; s < 1 + trial % 7; ++s)
            h[pick(rng)] += spike(rng);
        long long total = std::accumulate(h.begin(), h.end(), 0LL);
        double beta = 1.0 + (trial % 9);
        double limit = clahe_clip_limit(beta, static_cast<int>(total));
        auto c = clip_histogram(h, limit);
        EXPECT_EQ(std::accumulate(c.begin(), c.end(), 0LL), total);
        for (int b : c)
            ASSERT_LE(b, limit + 1);
    }
}

TEST(ClipHistogram, NonBindingLimitIsIdentity)
{
    Histogram h{};
    h[3] = 10;
    h[200] = 7;
    EXPECT_EQ(clip_histogram(h, 10.0), h);
}

TEST(ClipHistogram, RemainderGoesToLowBinsFirst)
{
    Histogram h{};
    h[100] = 300; // limit 10: cut at c where c + (300 - c) / 256 <= 10, i.e. c = 9 leaving 291 = 256 + 35
    auto c = clip_histogram(h, 10.0);
    EXPECT_EQ(c[100], 9 + 1);
    EXPECT_EQ(c[0], 2);
    EXPECT_EQ(c[34], 2);
    EXPECT_EQ(c[35], 1);
    EXPECT_EQ(c[255], 1);
}

TEST(Clahe, ConstantImageMapsToSingleLevel)
{
    // without clipping the only occupied bin carries the whole tile: cdf = tile size -> 255
    auto loose = clahe(GrayImage(40, 40, 90), 256.0, 4);
    for (auto p : loose.pixels())
        ASSERT_EQ(p, 255);
    // with clipping the level follows the redistributed cdf; 100-pixel tiles, limit 1:
    // bins 0..98 get one count each, bin 90 keeps 1 + 1, so cdf(90) = 92 -> round(92 * 255 / 100) = 235
    auto clipped = clahe(GrayImage(40, 40, 90), 2.0, 4);
    for (auto p : clipped.pixels())
        ASSERT_EQ(p, 235);
}

TEST(Clahe, NonBindingLimitMatchesPlainAdaptiveEqualization)
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> side(16, 70), grid(1, 8);
    for (int trial = 0; trial < 40; ++trial) {
        int w = side(rng), h = side(rng), n = std::min({grid(rng), w / 2, h / 2});
        GrayImage img(w, h);
        std::uniform_int_distribution<int> px(0, 255);
        for (auto& p : img.pixels())
            p = static_cast<std::uint8_t>(px(rng));
        auto out = clahe(img, 256.0, n);
        auto ref = testing::adaptive_equalization_reference(img, n);
        for (std::size_t i = 0; i < ref.size(); ++i)
            ASSERT_LE(std::abs(out.pixels()[i] - ref[i]), 1.0) << "trial " << trial << " index " << i;
    }
}

TEST(Clahe, PreconditionsAndErrors)
{
    GrayImage img(20, 20, 5);
    EXPECT_THROW(clahe(img, 0.5), std::invalid_argument);
    EXPECT_THROW(clahe(img, 2.0, 0), std::invalid_argument);
    EXPECT_THROW(clahe(img, 2.0, 11), GeometryError);
    EXPECT_NO_THROW(clahe(img, 2.0, 10));
}

TEST(Clahe, ClippingLimitsContrastGain)
{
    // a dim ramp with a dominant background: strong clipping stretches less than a loose limit
    GrayImage img(64, 64, 100);
    for (int x = 0; x < 64; ++x)
        img(x, 0) = static_cast<std::uint8_t>(90 + x / 4);
    auto spread = [](const GrayImage& g) {
        auto [lo, hi] = std::minmax_element(g.pixels().begin(), g.pixels().end());
        return *hi - *lo;
    };
    EXPECT_LE(spread(clahe(img, 1.0, 1)), spread(clahe(img, 64.0, 1)));
}

TEST(Morphology, SinglePixelExamples)
{
    GrayImage dot(7, 7, 0);
    dot(3, 3) = 255;
    auto d = dilate(dot, StructuringElement::rectangle(3, 3));
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x)
            EXPECT_EQ(d(x, y), std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1 ? 255 : 0);

    GrayImage hole(7, 7, 255);
    hole(3, 3) = 0;
    auto e = erode(hole, StructuringElement::rectangle(3, 3));
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x)
            EXPECT_EQ(e(x, y), std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1 ? 0 : 255);
}

TEST(Morphology, ConstantIsFixedPoint)
{
    GrayImage img(5, 8, 42);
    auto k = StructuringElement::rectangle(3, 3);
    EXPECT_EQ(dilate(img, k), img);
    EXPECT_EQ(erode(img, k), img);
}

TEST(Morphology, DualityAndOrdering)
{
    std::mt19937_64 rng(9);
    // an asymmetric element checks the reflection, the square one the plain duality
    const bool mask[] = {0, 1, 0, 0, 1, 1, 0, 0, 0};
    StructuringElement asym(3, 3, mask);
    for (int i = 0; i < 200; ++i) {
        auto img = testing::random_image(rng, 20);
        for (const auto& k : {StructuringElement::rectangle(3, 3), StructuringElement::rectangle(5, 1), asym}) {
            EXPECT_EQ(invert(dilate(invert(img), k)), erode(img, k.reflected()));
            auto lo = erode(img, k), hi = dilate(img, k);
            for (std::size_t p = 0; p < img.size(); ++p) {
                ASSERT_LE(lo.pixels()[p], img.pixels()[p]);
                ASSERT_LE(img.pixels()[p], hi.pixels()[p]);
            }
        }
    }
}

TEST(SuperResolution, DoublesDimensionsAndKeepsConstants)
{
    auto sr = default_super_resolver();
    EXPECT_EQ(sr->scale_factor(), 2);
    auto out = sr->upscale(GrayImage(96, 96, 133));
    EXPECT_EQ(out.width(), 192);
    EXPECT_EQ(out.height(), 192);
    for (auto p : out.pixels())
        EXPECT_EQ(p, 133);
}

TEST(SuperResolution, SharpensEdges)
{
    GrayImage img(8, 8, 40);
    for (int y = 0; y < 8; ++y)
        for (int x = 4; x < 8; ++x)
            img(x, y) = 200;
    auto up = resize(img, 16, 16);
    auto out = SharpenUpscaler().upscale(img);
    // across the edge the sharpened profile is at least as steep as plain bilinear
    EXPECT_LE(out(7, 8), up(7, 8));
    EXPECT_GE(out(8, 8), up(8, 8));
    EXPECT_EQ(out(0, 0), 40);
    EXPECT_EQ(out(15, 15), 200);
}

class ExternalResolverTest : public ::testing::Test
{
protected:
    std::filesystem::path script(const std::string& name, const std::string& body)
    {
        auto dir = std::filesystem::temp_directory_path() / "egoqr_sr_test";
        std::filesystem::create_directories(dir);
        auto path = dir / name;
        std::ofstream(path) << "#!/usr/bin/env python3\n" << body;
        std::filesystem::permissions(path, std::filesystem::perms::owner_all);
        return path;
    }
};

TEST_F(ExternalResolverTest, NearestNeighbourScript)
{
    auto path = script("nn.py", R"(import sys
data = sys.stdin.buffer.read()
parts = data.split(maxsplit=4)
w, h = int(parts[1]), int(parts[2])
px = data[len(data) - w * h:]
out = bytearray()
for y in range(2 * h):
    row = px[(y // 2) * w:(y // 2 + 1) * w]
    out += bytes(b for b in row for _ in range(2))
sys.stdout.buffer.write(b'P5\n%d %d\n255\n' % (2 * w, 2 * h) + bytes(out))
)");
    std::mt19937_64 rng(1);
    auto img = testing::random_image(rng, 300);
    auto out = ExternalResolver(path.string()).upscale(img);
    ASSERT_EQ(out.width(), img.width() * 2);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            ASSERT_EQ(out(x, y), img(x / 2, y / 2));
}

TEST_F(ExternalResolverTest, FailuresRaise)
{
    GrayImage img(10, 10, 1);
    auto failing = script("fail.py", "import sys\nsys.exit(3)\n");
    EXPECT_THROW(ExternalResolver(failing.string()).upscale(img), Error);
    auto wrong = script("wrong.py", "import sys\nsys.stdin.buffer.read()\nsys.stdout.buffer.write(b'P5\\n3 3\\n255\\n' + bytes(9))\n");
    EXPECT_THROW(ExternalResolver(wrong.string()).upscale(img), Error);
    EXPECT_THROW(ExternalResolver("/nonexistent/resolver").upscale(img), Error);
}

} // namespace
} // namespace egoqr
