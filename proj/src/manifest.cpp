// SPDX-License-Identifier: Apache-2.0

#include "egoqr/base64.hpp"
#include "egoqr/error.hpp"
#include "egoqr/simbench.hpp"

#include <json.hpp>

#include <fstream>

namespace egoqr {

namespace {

using json = nlohmann::ordered_json;

json to_json(const DegradationSpec& d)
{
    return {{"perspective_tilt", d.perspective_tilt},
            {"rotation", d.rotation},
            {"motion_length", d.motion_length},
            {"motion_angle", d.motion_angle},
            {"gaussian_sigma", d.gaussian_sigma},
            {"downscale", d.downscale},
            {"noise_sigma", d.noise_sigma},
            {"illumination_axis", d.illumination_axis},
            {"illumination_strength", d.illumination_strength}};
}

json to_json(const SceneSpec& spec)
{
    json codes = json::array();
    for (const auto& c : spec.codes)
        codes.push_back({{"payload_b64", base64_encode(c.payload)},
                         {"ec_level", std::string(to_string(c.ec_level))},
                         {"version", c.version ? json(*c.version) : json(nullptr)},
                         {"module_px", c.module_px},
                         {"center", {c.center.x, c.center.y}},
                         {"degradation", to_json(c.degradation)}});
    return {{"width", spec.width},
            {"height", spec.height},
            {"background",
             {{"kind", spec.background.kind == BackgroundKind::Flat ? "flat" : "texture"},
              {"level", spec.background.level},
              {"texture_seed", spec.background.texture_seed}}},
            {"codes", codes},
            {"seed", spec.seed}};
}

template <typename T>
T field(const json& j, const char* key, T fallback)
{
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

DegradationSpec degradation_from(const json& j)
{
    DegradationSpec d;
    d.perspective_tilt = field(j, "perspective_tilt", 0.0);
    d.rotation = field(j, "rotation", 0.0);
    d.motion_length = field(j, "motion_length", 0.0);
    d.motion_angle = field(j, "motion_angle", 0.0);
    d.gaussian_sigma = field(j, "gaussian_sigma", 0.0);
    d.downscale = field(j, "downscale", 1.0);
    d.noise_sigma = field(j, "noise_sigma", 0.0);
    d.illumination_axis = field(j, "illumination_axis", 0);
    d.illumination_strength = field(j, "illumination_strength", 0.0);
    return d;
}

SceneSpec spec_from(const json& j)
{
    if (!j.is_object())
        throw FormatError("scene spec must be an object");
    SceneSpec spec;
    spec.width = field(j, "width", spec.width);
    spec.height = field(j, "height", spec.height);
    if (auto it = j.find("background"); it != j.end()) {
        auto kind = field<std::string>(*it, "kind", "flat");
        if (kind != "flat" && kind != "texture")
            throw FormatError("unknown background kind: " + kind);
        spec.background.kind = kind == "flat" ? BackgroundKind::Flat : BackgroundKind::Texture;
        spec.background.level = field(*it, "level", spec.background.level);
        spec.background.texture_seed = field<std::uint64_t>(*it, "texture_seed", 0);
    }
    for (const auto& c : j.value("codes", json::array())) {
        SceneCode code;
        code.payload = base64_decode(c.at("payload_b64").get<std::string>());
        try {
            code.ec_level = parse_ec_level(field<std::string>(c, "ec_level", "M"));
        } catch (const std::invalid_argument& e) {
            throw FormatError(e.what());
        }
        if (auto v = c.find("version"); v != c.end() && !v->is_null())
            code.version = v->get<int>();
        code.module_px = field(c, "module_px", code.module_px);
        const auto& center = c.at("center");
        code.center = {center.at(0).get<double>(), center.at(1).get<double>()};
        if (auto d = c.find("degradation"); d != c.end())
            code.degradation = degradation_from(*d);
        spec.codes.push_back(std::move(code));
    }
    spec.seed = field<std::uint64_t>(j, "seed", 0);
    return spec;
}

ManifestEntry entry_from(const json& j)
{
    ManifestEntry e;
    e.image_path = j.at("image_path").get<std::string>();
    for (const auto& c : j.at("codes")) {
        const auto& b = c.at("box");
        if (b.size() != 4)
            throw FormatError("box must have four coordinates");
        ManifestCode code{base64_decode(c.at("payload_b64").get<std::string>()),
                          {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()}};
        if (!code.box.valid())
            throw FormatError("empty ground-truth box");
        e.codes.push_back(std::move(code));
    }
    if (auto s = j.find("spec"); s != j.end() && !s->is_null())
        e.spec = spec_from(*s);
    e.seed = field<std::uint64_t>(j, "seed", 0);
    return e;
}

} // namespace

std::string scene_spec_to_json(const SceneSpec& spec)
{
    return to_json(spec).dump();
}

SceneSpec scene_spec_from_json(std::string_view text)
{
    try {
        return spec_from(json::parse(text));
    } catch (const json::exception& e) {
        throw FormatError(std::string("scene spec: ") + e.what());
    }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest " + path.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            entries.push_back(entry_from(json::parse(line)));
        } catch (const json::exception& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (in.bad())
        throw IoError("error reading manifest " + path.string());
    return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write manifest " + path.string());
    for (const auto& e : entries) {
        json codes = json::array();
        for (const auto& c : e.codes)
            codes.push_back({{"payload_b64", base64_encode(c.payload)},
                             {"box", {c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max}}});
        json j{{"image_path", e.image_path},
               {"codes", codes},
               {"spec", e.spec ? to_json(*e.spec) : json(nullptr)},
               {"seed", e.seed}};
        out << j.dump() << '\n';
    }
    if (!out)
        throw IoError("error writing manifest " + path.string());
}

} // namespace egoqr
