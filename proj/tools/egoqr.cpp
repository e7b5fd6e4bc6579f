// SPDX-License-Identifier: Apache-2.0
// egoqr command line: encode, detect, scan, bench, simulate.

#include "egoqr/base64.hpp"
#include "egoqr/error.hpp"
#include "egoqr/fulfillment.hpp"
#include "egoqr/simbench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace egoqr;
using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

// sysexits-style codes; 2..4 are scan/encode outcomes
enum Exit : int {
    kOk = 0,
    kCapacity = 2,
    kNoCodeFound = 3,
    kCodeUnclear = 4,
    kUsage = 64,
    kDataError = 65,
    kNoInput = 66,
    kSoftware = 70,
};

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Common
{
    std::string format = "json";
    bool verbose = false;
    bool assume_gray = false;
    std::string thumb_max = "576x432";
};

struct PlanFlags
{
    std::string scales;
    std::string clahe_betas;
    bool no_sr = false;
    std::string sr_exec;
};

std::vector<double> parse_numbers(const std::string& text, const char* what)
{
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw UsageError(std::string("bad number in ") + what + ": '" + item + "'");
        }
    }
    return out;
}

std::vector<double> parse_fixed(const std::string& text, std::size_t n, const char* what)
{
    auto v = parse_numbers(text, what);
    if (v.size() != n)
        throw UsageError(std::string(what) + " needs " + std::to_string(n) + " comma separated numbers");
    return v;
}

DetectorConfig detector_config(const Common& c)
{
    int w = 0, h = 0;
    char x = 0;
    std::istringstream in(c.thumb_max);
    if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || !in.eof() || w < 1 || h < 1)
        throw UsageError("--thumb-max must look like WxH with positive integers, got '" + c.thumb_max + "'");
    DetectorConfig d;
    d.thumb_max_width = w;
    d.thumb_max_height = h;
    return d;
}

ScanConfig scan_config(const Common& c, const PlanFlags& p)
{
    ScanConfig config;
    config.detector = detector_config(c);
    if (!p.scales.empty())
        config.plan.scales = parse_numbers(p.scales, "--scales");
    if (!p.clahe_betas.empty())
        config.plan.clahe_betas = parse_numbers(p.clahe_betas, "--clahe-betas");
    config.plan.super_resolution = !p.no_sr;
    try {
        build_default_plan(config.plan);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (!p.sr_exec.empty())
        config.cascade.resolver = std::make_shared<ExternalResolver>(p.sr_exec);
    return config;
}

GrayImage load_image(const std::string& path, const Common& c)
{
    return c.assume_gray ? read_pnm_as_gray_file(path) : read_pgm_file(path);
}

Json box_json(const BoundingBox& b)
{
    return Json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

std::string ec_name(EcLevel level)
{
    static constexpr const char* kNames[] = {"L", "M", "Q", "H"};
    return kNames[static_cast<int>(level)];
}

/// Payload as base64 plus its bytes as a string; invalid UTF-8 is replaced when dumping.
Json payload_json(const DecodedPayload& p)
{
    return Json{{"payload_b64", base64_encode(p.bytes)},
                {"text", p.text()},
                {"version", p.version},
                {"ec_level", ec_name(p.ec_level)},
                {"mask", p.mask_id},
                {"corrected_errors", p.corrected_errors}};
}

std::string dump(const Json& j)
{
    return j.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

std::optional<int> stage_for(const ScanOutcome& out, const Candidate& c)
{
    for (const auto& a : out.attempts)
        if (a.detection.box == c.detection.box && a.decode.payload && a.decode.payload->bytes == c.payload.bytes)
            return a.decode.success_stage;
    return std::nullopt;
}

Json candidate_json(const ScanOutcome& out, const Candidate& c)
{
    Json j = payload_json(c.payload);
    j["box"] = box_json(c.detection.box);
    j["score"] = c.detection.score;
    auto stage = stage_for(out, c);
    j["stage"] = stage ? Json(*stage) : Json(nullptr);
    return j;
}

int cmd_encode(const std::string& text, const std::string& ec, int module_px, int quiet_zone, int version,
               const std::string& out_path, const Common& c)
{
    if (module_px < 1)
        throw UsageError("--module-px must be at least 1");
    if (quiet_zone < 0)
        throw UsageError("--quiet-zone must be non-negative");
    if (ec.size() != 1 || std::string("LMQH").find(ec[0]) == std::string::npos)
        throw UsageError("--ec must be one of L, M, Q, H");
    if (version != 0 && (version < 1 || version > 10))
        throw UsageError("--version must be within 1..10");
    const EcLevel level = static_cast<EcLevel>(std::string("LMQH").find(ec[0]));
    auto sym = encode(text, level, version ? std::optional<int>(version) : std::nullopt);
    write_pgm_file(out_path, render(sym, module_px, quiet_zone));

    if (c.format == "text") {
        std::cout << "wrote " << out_path << ": version " << sym.version << "-" << ec_name(sym.ec_level) << ", mask "
                  << sym.mask_id << ", " << sym.side() << " modules\n";
    } else {
        std::cout << dump(Json{{"schema", 1},
                               {"command", "encode"},
                               {"output", out_path},
                               {"version", sym.version},
                               {"ec_level", ec_name(sym.ec_level)},
                               {"mask", sym.mask_id},
                               {"modules", sym.side()},
                               {"module_px", module_px}});
    }
    return kOk;
}

int cmd_detect(const std::string& path, const Common& c)
{
    auto img = load_image(path, c);
    auto config = detector_config(c);
    auto detections = detect(img, config);
    if (c.format == "text") {
        std::cout << detections.size() << " detection(s) in " << path << "\n";
        for (const auto& d : detections)
            std::cout << "  [" << d.box.x_min << "," << d.box.y_min << "," << d.box.x_max << "," << d.box.y_max
                      << "] score " << d.score << "\n";
    } else {
        Json list = Json::array();
        for (const auto& d : detections) {
            Json centers = Json::array();
            for (auto p : d.finder_centers)
                centers.push_back({p.x, p.y});
            list.push_back({{"box", box_json(d.box)}, {"score", d.score}, {"finder_centers", centers}});
        }
        std::cout << dump(Json{{"schema", 1},
                               {"command", "detect"},
                               {"image", path},
                               {"width", img.width()},
                               {"height", img.height()},
                               {"detections", list}});
    }
    return detections.empty() ? kNoCodeFound : kOk;
}

int cmd_scan(const std::string& path, const std::string& roi, const std::string& point, int attempt,
             const PlanFlags& plan, const Common& c)
{
    auto config = scan_config(c, plan);
    auto img = load_image(path, c);
    ScanContext ctx;
    ctx.attempt = attempt;
    if (!roi.empty()) {
        auto v = parse_fixed(roi, 4, "--roi");
        BoundingBox b{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
        if (!b.valid() || b.x_min < 0 || b.y_min < 0 || b.x_max >= img.width() || b.y_max >= img.height())
            throw UsageError("--roi must be x0,y0,x1,y1 inside the image");
        ctx.roi = b;
    }
    if (!point.empty()) {
        auto v = parse_fixed(point, 4, "--point");
        if (v[2] == 0 && v[3] == 0)
            throw UsageError("--point direction must be non-zero");
        ctx.pointing = Ray({v[0], v[1]}, {v[2], v[3]});
    }

    auto out = scan(img, ctx, config);
    const int code = out.status == ScanStatus::Selected      ? kOk
                     : out.status == ScanStatus::NoCodeFound ? kNoCodeFound
                                                             : kCodeUnclear;
    if (c.format == "text") {
        std::cout << "status: " << to_string(out.status) << "\nfeedback: " << out.feedback << "\n";
        if (out.selected)
            std::cout << "selected: " << out.selected->payload.text() << "\n";
        for (const auto& d : out.all_decoded)
            std::cout << "decoded: [" << d.detection.box.x_min << "," << d.detection.box.y_min << ","
                      << d.detection.box.x_max << "," << d.detection.box.y_max << "] " << d.payload.text() << "\n";
        return code;
    }

    const auto plan_stages = config.plan_override ? *config.plan_override : build_default_plan(config.plan);
    Json j{{"schema", 1},
           {"command", "scan"},
           {"image", path},
           {"status", to_string(out.status)},
           {"feedback", out.feedback},
           {"selected", out.selected ? candidate_json(out, *out.selected) : Json(nullptr)}};
    Json decoded = Json::array();
    for (const auto& d : out.all_decoded)
        decoded.push_back(candidate_json(out, d));
    j["decoded"] = decoded;
    j["detections"] = out.attempts.size();
    if (c.verbose) {
        Json attempts = Json::array();
        for (const auto& a : out.attempts) {
            Json stages = Json::array();
            for (const auto& s : a.decode.stages)
                stages.push_back({{"index", s.stage_index},
                                  {"label", plan_stages.stages[s.stage_index].label()},
                                  {"attempted", s.attempted},
                                  {"outcome", to_string(s.outcome)},
                                  {"elapsed_us", s.elapsed_us}});
            attempts.push_back({{"box", box_json(a.detection.box)},
                                {"score", a.detection.score},
                                {"crop", box_json(a.crop)},
                                {"success_stage", a.decode.success_stage ? Json(*a.decode.success_stage) : Json(nullptr)},
                                {"stages", stages}});
        }
        j["attempts"] = attempts;
        j["super_resolver"] = config.cascade.resolver ? config.cascade.resolver->identity() : "none";
    }
    std::cout << dump(j);
    return code;
}

int cmd_bench(const std::string& manifest, const std::string& report_dir, int threads, const PlanFlags& plan,
              const Common& c)
{
    if (threads < 0)
        throw UsageError("--threads must be non-negative");
    BenchConfig config;
    config.scan = scan_config(c, plan);
    config.threads = threads;
    if (!fs::exists(manifest))
        throw IoError("cannot open " + manifest);
    auto result = run_bench(manifest, config);
    write_report(report_dir, result);
    const auto& r = result.report;
    if (c.format == "text") {
        std::printf("codes %d  detected %d  matched %d  small-code misses %d\n", r.total, r.detected, r.matched,
                    r.small_code_misses);
        std::printf("detection %.4f  decoding %.4f  end-to-end %.4f\n", r.detection_rate, r.decoding_rate,
                    r.end_to_end_rate);
        for (const auto& s : ablate_stages(result))
            if (s.wins)
                std::printf("  stage %2d %-24s %d\n", s.index, s.label.c_str(), s.wins);
        std::printf("report written to %s\n", report_dir.c_str());
    } else {
        std::cout << report_json(r);
    }
    return kOk;
}

std::vector<SceneSpec> simulation_specs(const std::string& spec_path, const std::string& preset, int scenes,
                                        std::optional<std::uint64_t> seed)
{
    if (!preset.empty()) {
        if (!spec_path.empty())
            throw UsageError("give either a spec file or --preset, not both");
        try {
            return make_preset(preset, scenes, seed.value_or(0));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (spec_path.empty())
        throw UsageError("simulate needs a spec file or --preset");
    std::ifstream in(spec_path);
    if (!in)
        throw IoError("cannot open " + spec_path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw FormatError(spec_path + ": " + e.what());
    }
    if (!j.is_object())
        throw FormatError(spec_path + ": expected a JSON object");
    if (j.contains("preset")) {
        if (!j["preset"].is_string() || !j.value("scenes", Json(0)).is_number_integer())
            throw FormatError(spec_path + ": preset must be a string and scenes an integer");
        auto s = j.value("seed", Json(0));
        if (!s.is_number_unsigned() && !s.is_number_integer())
            throw FormatError(spec_path + ": seed must be an integer");
        try {
            return make_preset(j["preset"].get<std::string>(), j.value("scenes", 0),
                               seed.value_or(s.get<std::uint64_t>()));
        } catch (const std::invalid_argument& e) {
            throw FormatError(spec_path + ": " + e.what());
        }
    }
    if (!j.contains("scenes") || !j["scenes"].is_array())
        throw FormatError(spec_path + ": expected \"preset\" or a \"scenes\" array");
    std::vector<SceneSpec> out;
    for (const auto& s : j["scenes"]) {
        out.push_back(scene_spec_from_json(s.dump()));
        if (seed)
            out.back().seed = *seed + out.size() - 1;
    }
    return out;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, const std::string& preset, int scenes,
                 std::optional<std::uint64_t> seed, const Common& c)
{
    if (scenes < 0)
        throw UsageError("--scenes must be non-negative");
    auto specs = simulation_specs(spec_path, preset, scenes, seed);
    for (const auto& s : specs)
        for (const auto& code : s.codes)
            code.degradation.validate();
    auto manifest = write_corpus(out_dir, specs);
    std::size_t codes = 0;
    for (const auto& s : specs)
        codes += s.codes.size();
    if (c.format == "text")
        std::cout << "wrote " << specs.size() << " scene(s), " << codes << " code(s); manifest " << manifest.string()
                  << "\n";
    else
        std::cout << dump(Json{{"schema", 1},
                               {"command", "simulate"},
                               {"scenes", specs.size()},
                               {"codes", codes},
                               {"manifest", manifest.string()}});
    return kOk;
}

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    cmd->add_flag("--verbose", c.verbose, "Include per-stage telemetry");
    cmd->add_option("--thumb-max", c.thumb_max, "Detector thumbnail bound WxH");
}

void add_plan(CLI::App* cmd, PlanFlags& p)
{
    cmd->add_option("--scales", p.scales, "Comma separated rescale factors");
    cmd->add_option("--clahe-betas", p.clahe_betas, "Comma separated CLAHE clip factors");
    cmd->add_flag("--no-sr", p.no_sr, "Drop the super-resolution stages");
    cmd->add_option("--sr-exec", p.sr_exec, "External x2 upscaler (PGM on stdin/stdout)")->envname("EGOQR_SR_EXEC");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Detect and decode QR codes in grayscale images; generate and score synthetic corpora."};
    app.require_subcommand(1);
    Common common;
    PlanFlags plan;

    std::string text, ec = "M", out_path, image, roi, point, manifest, report_dir, corpus_dir, spec_path, preset;
    int module_px = 4, quiet_zone = 4, version = 0, attempt = 0, threads = 0, scenes = 20;
    std::optional<std::uint64_t> seed;

    auto* enc = app.add_subcommand("encode", "Encode text into a PGM symbol");
    enc->add_option("text", text, "Payload")->required();
    enc->add_option("-o,--output", out_path, "Output PGM")->required();
    enc->add_option("--ec", ec, "Error correction level L, M, Q or H");
    enc->add_option("--module-px", module_px, "Pixels per module");
    enc->add_option("--quiet-zone", quiet_zone, "Light modules around the symbol");
    enc->add_option("--version", version, "Force a version 1..10 (0 = smallest fitting)");
    add_common(enc, common);

    auto* det = app.add_subcommand("detect", "List candidate code regions");
    det->add_option("image", image, "PGM image")->required();
    det->add_flag("--assume-gray", common.assume_gray, "Accept binary PPM and reduce it to BT.601 luma");
    add_common(det, common);

    auto* scn = app.add_subcommand("scan", "Detect, decode and pick the intended code");
    scn->add_option("image", image, "PGM image")->required();
    scn->add_option("--roi", roi, "Region of interest x0,y0,x1,y1");
    scn->add_option("--point", point, "Pointing ray ox,oy,dx,dy");
    scn->add_option("--attempt", attempt, "Number of earlier failed scans of this scene");
    scn->add_flag("--assume-gray", common.assume_gray, "Accept binary PPM and reduce it to BT.601 luma");
    add_common(scn, common);
    add_plan(scn, plan);

    auto* bench = app.add_subcommand("bench", "Score a manifest and write report.json and CSVs");
    bench->add_option("manifest", manifest, "manifest.jsonl")->required();
    bench->add_option("-o,--output", report_dir, "Report directory")->required();
    bench->add_option("--threads", threads, "Worker threads (0 = all cores)");
    add_common(bench, common);
    add_plan(bench, plan);

    auto* sim = app.add_subcommand("simulate", "Render a synthetic corpus with its manifest");
    sim->add_option("spec", spec_path, "Simulation spec JSON");
    sim->add_option("-o,--output", corpus_dir, "Corpus directory")->required();
    sim->add_option("--preset", preset, "Named corpus instead of a spec file");
    sim->add_option("--scenes", scenes, "Scene count for --preset");
    sim->add_option("--seed", seed, "Corpus seed");
    add_common(sim, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*enc)
            return cmd_encode(text, ec, module_px, quiet_zone, version, out_path, common);
        if (*det)
            return cmd_detect(image, common);
        if (*scn)
            return cmd_scan(image, roi, point, attempt, plan, common);
        if (*bench)
            return cmd_bench(manifest, report_dir, threads, plan, common);
        if (*sim)
            return cmd_simulate(spec_path, corpus_dir, preset, scenes, seed, common);
    } catch (const UsageError& e) {
        std::cerr << "egoqr: " << e.what() << "\n";
        return kUsage;
    } catch (const CapacityError& e) {
        std::cerr << "egoqr: " << e.what() << "\n";
        return kCapacity;
    } catch (const IoError& e) {
        std::cerr << "egoqr: " << e.what() << "\n";
        return kNoInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "egoqr: " << e.what() << "\n";
        return kDataError;
    } catch (const Error& e) {
        std::cerr << "egoqr: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "egoqr: internal error: " << e.what() << "\n";
        return kSoftware;
    }
    return kUsage;
}
