// SPDX-License-Identifier: Apache-2.0

#include "egoqr/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace egoqr {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::vector<std::uint8_t> random_text(Rng& rng, int min_len, int max_len)
{
    std::vector<std::uint8_t> out(static_cast<std::size_t>(uniform_int(rng, min_len, max_len)));
    for (auto& b : out)
        b = static_cast<std::uint8_t>(uniform_int(rng, 0x20, 0x7E));
    return out;
}

Background random_background(Rng& rng, bool textured)
{
    Background bg;
    bg.kind = textured ? BackgroundKind::Texture : BackgroundKind::Flat;
    bg.level = uniform_int(rng, 140, 200);
    bg.texture_seed = rng();
    return bg;
}

int symbol_side(const SceneCode& code)
{
    return encode(code.payload, code.ec_level, code.version).side();
}

/// Sets module_px so the symbol spans `side_px` canvas pixels before the view transform.
void size_code(SceneCode& code, double side_px)
{
    code.module_px = side_px / symbol_side(code);
}

BoundingBox truth_box(const SceneCode& code)
{
    const int side = symbol_side(code);
    auto h = code_placement(code, side);
    const double s = side;
    std::array<PointF, 4> corners{h.map({0, 0}), h.map({s, 0}), h.map({s, s}), h.map({0, s})};
    return bounding_box_of(corners);
}

/// Random center such that the sticker fits with an 8 px border and clears `taken`; false after 200 tries.
bool place(Rng& rng, SceneCode& code, const SceneSpec& spec, std::vector<BoundingBox>& taken)
{
    for (int attempt = 0; attempt < 200; ++attempt) {
        code.center = {uniform(rng, 0, spec.width), uniform(rng, 0, spec.height)};
        auto b = sticker_bounds(code);
        if (b.x_min < 8 || b.y_min < 8 || b.x_max >= spec.width - 8 || b.y_max >= spec.height - 8)
            continue;
        bool clear = std::none_of(taken.begin(), taken.end(), [&](const BoundingBox& t) {
            return b.x_min <= t.x_max + 8 && t.x_min <= b.x_max + 8 && b.y_min <= t.y_max + 8 && t.y_min <= b.y_max + 8;
        });
        if (clear) {
            taken.push_back(b);
            return true;
        }
    }
    return false;
}

using CodeMaker = std::function<SceneCode(Rng&)>;

std::vector<SceneSpec> build(int scenes, std::uint64_t seed, int width, int height, int min_codes, int max_codes,
                             bool textured, const CodeMaker& make_code)
{
    Rng rng(seed);
    std::vector<SceneSpec> out;
    for (int i = 0; i < scenes; ++i) {
        SceneSpec spec;
        spec.width = width;
        spec.height = height;
        spec.background = random_background(rng, textured);
        spec.seed = rng();
        std::vector<BoundingBox> taken;
        const int n = uniform_int(rng, min_codes, max_codes);
        for (int c = 0; c < n; ++c) {
            SceneCode code = make_code(rng);
            if (place(rng, code, spec, taken))
                spec.codes.push_back(std::move(code));
        }
        out.push_back(std::move(spec));
    }
    return out;
}

SceneCode clean_code(Rng& rng)
{
    SceneCode c;
    c.payload = random_text(rng, 6, 40);
    c.ec_level = EcLevel::M;
    c.module_px = uniform_int(rng, 4, 6);
    return c;
}

SceneCode mild_code(Rng& rng)
{
    SceneCode c;
    c.payload = random_text(rng, 8, 60);
    c.ec_level = uniform_int(rng, 0, 1) ? EcLevel::Q : EcLevel::M;
    auto& d = c.degradation;
    d.perspective_tilt = uniform(rng, 0, 25);
    d.rotation = uniform(rng, -45, 45);
    d.gaussian_sigma = uniform(rng, 0, 1.0);
    d.noise_sigma = uniform(rng, 0, 8);
    d.illumination_axis = uniform_int(rng, 0, 1);
    d.illumination_strength = uniform(rng, 0, 0.25);
    size_code(c, uniform(rng, 140, 300));
    // every mild code spans at least 120 x 120 canvas pixels
    for (auto b = truth_box(c); b.width() < 120 || b.height() < 120; b = truth_box(c))
        c.module_px *= 1.05;
    return c;
}

SceneCode lowres_code(Rng& rng)
{
    SceneCode c;
    c.payload = random_text(rng, 5, 24);
    c.ec_level = uniform_int(rng, 0, 1) ? EcLevel::M : EcLevel::L;
    c.module_px = uniform(rng, 1.4, 1.95);
    auto& d = c.degradation;
    d.rotation = uniform(rng, -10, 10);
    d.gaussian_sigma = uniform(rng, 0.4, 0.9);
    d.noise_sigma = uniform(rng, 0, 3);
    return c;
}

/// `thumb_scale` converts canvas pixels to detector thumbnail pixels.
SceneCode sweep_code(Rng& rng, double thumb_scale)
{
    static constexpr double kRotations[] = {0, 15, 30, 45};
    SceneCode c;
    c.payload = random_text(rng, 4, 50);
    c.ec_level = EcLevel::M;
    auto& d = c.degradation;
    d.perspective_tilt = uniform(rng, 0, 25);
    d.rotation = kRotations[uniform_int(rng, 0, 3)];
    d.gaussian_sigma = uniform(rng, 0, 0.8);
    d.noise_sigma = uniform(rng, 0, 6);
    size_code(c, uniform(rng, 30, 120) / thumb_scale);
    // the symbol itself covers at least 30 x 30 thumbnail pixels
    for (auto b = truth_box(c); std::min(b.width(), b.height()) * thumb_scale < 30; b = truth_box(c))
        c.module_px *= 1.05;
    return c;
}

SceneCode size_code_for_curve(Rng& rng)
{
    SceneCode c;
    c.payload = random_text(rng, 4, 40);
    c.ec_level = EcLevel::M;
    auto& d = c.degradation;
    d.perspective_tilt = uniform(rng, 0, 20);
    d.rotation = uniform(rng, -45, 45);
    d.gaussian_sigma = uniform(rng, 0, 0.8);
    d.noise_sigma = uniform(rng, 0, 6);
    size_code(c, uniform(rng, 40, 320));
    return c;
}

} // namespace

std::vector<std::string> preset_names()
{
    return {"clean", "mild", "lowres", "sweep", "size"};
}

std::vector<SceneSpec> make_preset(const std::string& name, int scenes, std::uint64_t seed)
{
    if (scenes < 0)
        throw std::invalid_argument("scene count must be non-negative");
    if (name == "clean")
        return build(scenes, seed, 1152, 864, 1, 3, false, clean_code);
    if (name == "mild")
        return build(scenes, seed, 1152, 864, 1, 2, true, mild_code);
    if (name == "lowres")
        return build(scenes, seed, 576, 432, 1, 2, false, lowres_code);
    if (name == "sweep")
        return build(scenes, seed, 1152, 864, 1, 2, true, [](Rng& rng) { return sweep_code(rng, 0.5); });
    if (name == "size")
        return build(scenes, seed, 1152, 864, 1, 2, true, size_code_for_curve);
    throw std::invalid_argument("unknown preset: " + name);
}

} // namespace egoqr
