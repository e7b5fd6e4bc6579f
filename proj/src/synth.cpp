// SPDX-License-Identifier: Apache-2.0

#include "egoqr/simbench.hpp"

#include "egoqr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace egoqr {

namespace {

constexpr int kQuietZone = 4;
constexpr int kSupersample = 4;

double radians(double deg)
{
    return deg * std::numbers::pi / 180.0;
}

std::uint8_t round_px(double v)
{
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

GrayImage make_background(const SceneSpec& spec)
{
    GrayImage img(spec.width, spec.height, static_cast<std::uint8_t>(std::clamp(spec.background.level, 0, 255)));
    if (spec.background.kind == BackgroundKind::Flat)
        return img;
    // smooth value noise on a 32 px lattice, +-50 around the base level
    constexpr int kCell = 32;
    const int gw = spec.width / kCell + 2, gh = spec.height / kCell + 2;
    std::mt19937_64 rng(spec.background.texture_seed);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
    for (auto& v : lattice)
        v = u(rng);
    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            double fx = static_cast<double>(x) / kCell, fy = static_cast<double>(y) / kCell;
            int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
            double tx = fx - ix, ty = fy - iy;
            auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * gw + i]; };
            double v = (1 - tx) * (1 - ty) * at(ix, iy) + tx * (1 - ty) * at(ix + 1, iy) + (1 - tx) * ty * at(ix, iy + 1) +
                       tx * ty * at(ix + 1, iy + 1);
            img(x, y) = round_px(spec.background.level + v);
        }
    return img;
}

std::array<PointF, 4> map_quad(const Homography& h, double lo, double hi)
{
    return {h.map({lo, lo}), h.map({hi, lo}), h.map({hi, hi}), h.map({lo, hi})};
}

GrayImage copy_region(const GrayImage& img, const BoundingBox& r)
{
    GrayImage out(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x)
            out(x, y) = img(r.x_min + x, r.y_min + y);
    return out;
}

void paste_region(GrayImage& img, const GrayImage& patch, const BoundingBox& r)
{
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x)
            img(r.x_min + x, r.y_min + y) = patch(x, y);
}

double bilinear_at(const GrayImage& img, double x, double y)
{
    // (x, y) in pixel-center coordinates
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    double fx = x - x0, fy = y - y0;
    return (1 - fx) * (1 - fy) * img.clamped(x0, y0) + fx * (1 - fy) * img.clamped(x0 + 1, y0) +
           (1 - fx) * fy * img.clamped(x0, y0 + 1) + fx * fy * img.clamped(x0 + 1, y0 + 1);
}

} // namespace

void DegradationSpec::validate() const
{
    if (perspective_tilt < 0 || perspective_tilt >= 80)
        throw std::invalid_argument("perspective tilt must be in [0, 80) degrees");
    if (motion_length < 0 || gaussian_sigma < 0 || noise_sigma < 0)
        throw std::invalid_argument("degradation magnitudes must be non-negative");
    if (!(downscale > 0 && downscale <= 1))
        throw std::invalid_argument("downscale ratio must be in (0, 1]");
    if (illumination_axis != 0 && illumination_axis != 1)
        throw std::invalid_argument("illumination axis must be 0 (x) or 1 (y)");
    if (illumination_strength < 0 || illumination_strength >= 1)
        throw std::invalid_argument("illumination strength must be in [0, 1)");
}

GrayImage gaussian_blur(const GrayImage& img, double sigma)
{
    if (sigma <= 0)
        return img;
    const int r = static_cast<int>(std::ceil(3 * sigma));
    std::vector<double> k(2 * r + 1);
    double sum = 0;
    for (int i = -r; i <= r; ++i)
        sum += k[i + r] = std::exp(-i * i / (2 * sigma * sigma));
    for (auto& v : k)
        v /= sum;

    std::vector<double> tmp(img.size());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i)
                acc += k[i + r] * img.clamped(x + i, y);
            tmp[static_cast<std::size_t>(y) * img.width() + x] = acc;
        }
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0;
            for (int i = -r; i <= r; ++i) {
                int yy = std::clamp(y + i, 0, img.height() - 1);
                acc += k[i + r] * tmp[static_cast<std::size_t>(yy) * img.width() + x];
            }
            out(x, y) = round_px(acc);
        }
    return out;
}

GrayImage motion_blur(const GrayImage& img, double length, double angle_deg)
{
    if (length <= 0)
        return img;
    const int samples = std::max(2, static_cast<int>(std::ceil(length)) + 1);
    const double dx = std::cos(radians(angle_deg)), dy = std::sin(radians(angle_deg));
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0;
            for (int i = 0; i < samples; ++i) {
                double t = -length / 2 + length * i / (samples - 1);
                acc += bilinear_at(img, x + t * dx, y + t * dy);
            }
            out(x, y) = round_px(acc / samples);
        }
    return out;
}

Homography code_placement(const SceneCode& code, int side)
{
    if (!(code.module_px > 0))
        throw std::invalid_argument("module size must be positive");
    const double half = side / 2.0;
    const double extent = (side + 2.0 * kQuietZone) * code.module_px;
    const double focal = 3.0 * extent;
    const double cr = std::cos(radians(code.degradation.rotation)), sr = std::sin(radians(code.degradation.rotation));
    const double ct = std::cos(radians(code.degradation.perspective_tilt)),
                 st = std::sin(radians(code.degradation.perspective_tilt));
    auto project = [&](PointF m) {
        double x = (m.x - half) * code.module_px, y = (m.y - half) * code.module_px;
        double xr = cr * x - sr * y, yr = sr * x + cr * y;
        double x3 = xr * ct, z3 = xr * st;
        double k = focal / (focal + z3);
        return PointF{code.center.x + k * x3, code.center.y + k * yr};
    };
    const double s = side;
    std::array<PointF, 4> src{PointF{0, 0}, {s, 0}, {s, s}, {0, s}};
    std::array<PointF, 4> dst{project(src[0]), project(src[1]), project(src[2]), project(src[3])};
    return Homography::from_quads(src, dst);
}

BoundingBox sticker_bounds(const SceneCode& code)
{
    const int side = encode(code.payload, code.ec_level, code.version).side();
    return bounding_box_of(map_quad(code_placement(code, side), -kQuietZone, side + kQuietZone));
}

Scene synthesize_scene(const SceneSpec& spec)
{
    if (spec.width < 1 || spec.height < 1)
        throw GeometryError("canvas dimensions must be positive");

    struct Placed
    {
        QrSymbol symbol;
        Homography to_canvas;
        BoundingBox sticker;
        BoundingBox window;
    };
    std::vector<Placed> placed;
    for (const auto& code : spec.codes) {
        code.degradation.validate();
        Placed p;
        p.symbol = encode(code.payload, code.ec_level, code.version);
        p.to_canvas = code_placement(code, p.symbol.side());
        auto quad = map_quad(p.to_canvas, -kQuietZone, p.symbol.side() + kQuietZone);
        p.sticker = bounding_box_of(quad);
        if (p.sticker.x_min < 0 || p.sticker.y_min < 0 || p.sticker.x_max >= spec.width || p.sticker.y_max >= spec.height)
            throw GeometryError("code does not fit on the canvas");
        const auto& d = code.degradation;
        int pad = 8 + static_cast<int>(std::ceil(3 * d.gaussian_sigma + d.motion_length));
        p.window = *clamp_to({p.sticker.x_min - pad, p.sticker.y_min - pad, p.sticker.x_max + pad, p.sticker.y_max + pad},
                             spec.width, spec.height);
        for (const auto& q : placed)
            if (iou(q.sticker, p.sticker) > 0 || q.sticker.contains(p.sticker.center()))
                throw GeometryError("codes overlap");
        placed.push_back(std::move(p));
    }

    Scene scene;
    scene.image = make_background(spec);
    for (std::size_t c = 0; c < placed.size(); ++c) {
        const auto& p = placed[c];
        const int n = p.symbol.side();
        const auto to_module = p.to_canvas.inverse();
        for (int y = p.sticker.y_min; y <= p.sticker.y_max; ++y)
            for (int x = p.sticker.x_min; x <= p.sticker.x_max; ++x) {
                int sum = 0;
                for (int j = 0; j < kSupersample; ++j)
                    for (int i = 0; i < kSupersample; ++i) {
                        PointF m = to_module.map({x + (i + 0.5) / kSupersample, y + (j + 0.5) / kSupersample});
                        if (m.x < -kQuietZone || m.y < -kQuietZone || m.x >= n + kQuietZone || m.y >= n + kQuietZone) {
                            sum += scene.image(x, y);
                            continue;
                        }
                        int mx = static_cast<int>(std::floor(m.x)), my = static_cast<int>(std::floor(m.y));
                        bool dark = mx >= 0 && my >= 0 && mx < n && my < n && p.symbol.modules.get(mx, my);
                        sum += dark ? 0 : 255;
                    }
                scene.image(x, y) = static_cast<std::uint8_t>((sum + kSupersample * kSupersample / 2) /
                                                              (kSupersample * kSupersample));
            }

        GroundTruth truth;
        truth.payload = spec.codes[c].payload;
        truth.corners = map_quad(p.to_canvas, 0, n);
        truth.box = *clamp_to(bounding_box_of(truth.corners), spec.width, spec.height);
        scene.truth.push_back(truth);
    }

    // degradations act on a window around each sticker, in code order
    for (std::size_t c = 0; c < placed.size(); ++c) {
        const auto& d = spec.codes[c].degradation;
        const auto& w = placed[c].window;
        GrayImage region = copy_region(scene.image, w);
        region = gaussian_blur(region, d.gaussian_sigma);
        region = motion_blur(region, d.motion_length, d.motion_angle);
        if (d.downscale < 1.0) {
            int sw = std::max(1, static_cast<int>(std::lround(region.width() * d.downscale)));
            int sh = std::max(1, static_cast<int>(std::lround(region.height() * d.downscale)));
            region = resize(resize_area(region, sw, sh), region.width(), region.height());
        }
        if (d.noise_sigma > 0) {
            std::mt19937_64 rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (c + 1)));
            std::normal_distribution<double> noise(0.0, d.noise_sigma);
            for (auto& px : region.pixels())
                px = round_px(px + noise(rng));
        }
        if (d.illumination_strength > 0) {
            const int len = d.illumination_axis == 0 ? region.width() : region.height();
            for (int y = 0; y < region.height(); ++y)
                for (int x = 0; x < region.width(); ++x) {
                    double t = len > 1 ? static_cast<double>(d.illumination_axis == 0 ? x : y) / (len - 1) : 0.0;
                    region(x, y) = round_px(region(x, y) * (1.0 - d.illumination_strength * t));
                }
        }
        paste_region(scene.image, region, w);
    }
    return scene;
}

} // namespace egoqr
