// SPDX-License-Identifier: Apache-2.0

#include "egoqr/base64.hpp"
#include "egoqr/error.hpp"
#include "egoqr/simbench.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace egoqr {

namespace {

constexpr long long kSizeMarker = 10'000;

struct SceneRecords
{
    std::vector<BenchRecord> records;
    std::exception_ptr error;
};

double ratio(int num, int den)
{
    return den ? static_cast<double>(num) / den : 0.0;
}

double thumbnail_scale(const GrayImage& img, const DetectorConfig& config)
{
    if (img.width() <= config.thumb_max_width && img.height() <= config.thumb_max_height)
        return 1.0;
    return 1.0 / std::max(static_cast<double>(img.width()) / config.thumb_max_width,
                          static_cast<double>(img.height()) / config.thumb_max_height);
}

std::vector<BenchRecord> score_scene(std::size_t index, const ManifestEntry& entry, const std::filesystem::path& base_dir,
                                     const BenchConfig& config)
{
    std::filesystem::path path(entry.image_path);
    if (path.is_relative())
        path = base_dir / path;
    GrayImage img = read_pgm_file(path.string());
    auto outcome = scan(img, {}, config.scan);
    const double thumb = thumbnail_scale(img, config.scan.detector);

    std::vector<BenchRecord> out;
    for (std::size_t c = 0; c < entry.codes.size(); ++c) {
        const auto& truth = entry.codes[c];
        BenchRecord r;
        r.scene = index;
        r.code_id = c;
        r.payload = truth.payload;
        r.patch_area = truth.box.area();
        for (const auto& a : outcome.attempts) {
            if (iou(a.detection.box, truth.box) < 0.5)
                continue;
            r.detected = true;
            if (!a.decode.payload)
                continue;
            r.decoded = true;
            if (!r.matched && a.decode.payload->bytes == truth.payload) {
                r.matched = true;
                r.winning_stage = a.decode.success_stage;
            }
        }
        if (!r.detected) {
            bool small = truth.box.width() * thumb <= config.small_code_thumb_px &&
                         truth.box.height() * thumb <= config.small_code_thumb_px;
            r.failure = small ? FailureReason::SmallCodeMiss : FailureReason::NotDetected;
        } else if (!r.decoded) {
            r.failure = FailureReason::DecodeFailed;
        } else if (!r.matched) {
            r.failure = FailureReason::WrongPayload;
        }
        out.push_back(std::move(r));
    }
    return out;
}

void count_into(SizeBucket& b, const BenchRecord& r)
{
    if (r.patch_area > b.min_sqpx && (!b.max_sqpx || r.patch_area <= *b.max_sqpx)) {
        ++b.n;
        b.matched += r.matched;
    }
}

BenchReport summarize(const std::vector<BenchRecord>& records, const EnhancementPlan& plan, const BenchConfig& config)
{
    BenchReport rep;
    for (std::size_t i = 0; i < plan.stages.size(); ++i)
        rep.stage_wins.push_back({static_cast<int>(i), plan.stages[i].label(), 0});
    long long lo = 0;
    for (long long edge : config.bucket_edges) {
        rep.size_buckets.push_back({lo, edge});
        lo = edge;
    }
    rep.size_buckets.push_back({lo, std::nullopt});
    rep.small = {0, kSizeMarker};
    rep.large = {kSizeMarker, std::nullopt};

    for (const auto& r : records) {
        ++rep.total;
        rep.detected += r.detected;
        rep.decoded += r.decoded;
        rep.matched += r.matched;
        rep.small_code_misses += r.failure == FailureReason::SmallCodeMiss;
        if (r.winning_stage && *r.winning_stage >= 0 && *r.winning_stage < static_cast<int>(rep.stage_wins.size()))
            ++rep.stage_wins[*r.winning_stage].wins;
        for (auto& b : rep.size_buckets)
            count_into(b, r);
        count_into(rep.small, r);
        count_into(rep.large, r);
    }
    rep.detection_rate = ratio(rep.detected, rep.total);
    rep.decoding_rate = ratio(rep.matched, rep.detected);
    rep.end_to_end_rate = ratio(rep.matched, rep.total);
    return rep;
}

std::string fixed6(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

nlohmann::ordered_json bucket_json(const SizeBucket& b)
{
    return {{"min_sqpx", b.min_sqpx},
            {"max_sqpx", b.max_sqpx ? nlohmann::ordered_json(*b.max_sqpx) : nlohmann::ordered_json(nullptr)},
            {"n", b.n},
            {"matched", b.matched},
            {"success_rate", b.success_rate()}};
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw IoError("cannot write " + path.string());
}

} // namespace

std::string_view to_string(FailureReason reason)
{
    switch (reason) {
    case FailureReason::None: return "none";
    case FailureReason::NotDetected: return "not_detected";
    case FailureReason::SmallCodeMiss: return "small_code_miss";
    case FailureReason::DecodeFailed: return "decode_failed";
    case FailureReason::WrongPayload: return "wrong_payload";
    }
    return "?";
}

BenchResult run_bench(const std::vector<ManifestEntry>& manifest, const std::filesystem::path& base_dir,
                      const BenchConfig& config)
{
    const auto plan = config.scan.plan_override ? *config.scan.plan_override : build_default_plan(config.scan.plan);
    BenchConfig resolved = config;
    resolved.scan.plan_override = plan;

    std::vector<SceneRecords> per_scene(manifest.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < manifest.size();) {
            try {
                per_scene[i].records = score_scene(i, manifest[i], base_dir, resolved);
            } catch (...) {
                per_scene[i].error = std::current_exception();
            }
        }
    };
    unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, manifest.size())));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    pool.clear();

    BenchResult result;
    for (auto& s : per_scene) {
        if (s.error)
            std::rethrow_exception(s.error);
        for (auto& r : s.records)
            result.records.push_back(std::move(r));
    }
    result.report = summarize(result.records, plan, config);
    return result;
}

BenchResult run_bench(const std::filesystem::path& manifest_path, const BenchConfig& config)
{
    return run_bench(read_manifest(manifest_path), manifest_path.parent_path(), config);
}

std::vector<StageWins> ablate_stages(const BenchResult& result)
{
    return result.report.stage_wins;
}

std::string report_json(const BenchReport& r)
{
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& s : r.stage_wins)
        stages.push_back({{"index", s.index}, {"label", s.label}, {"wins", s.wins}});
    nlohmann::ordered_json buckets = nlohmann::ordered_json::array();
    for (const auto& b : r.size_buckets)
        buckets.push_back(bucket_json(b));
    nlohmann::ordered_json j{{"schema", 1},
                             {"total", r.total},
                             {"detected", r.detected},
                             {"decoded", r.decoded},
                             {"matched", r.matched},
                             {"small_code_misses", r.small_code_misses},
                             {"detection_rate", r.detection_rate},
                             {"decoding_rate", r.decoding_rate},
                             {"end_to_end_rate", r.end_to_end_rate},
                             {"size_marker_sqpx", kSizeMarker},
                             {"small", bucket_json(r.small)},
                             {"large", bucket_json(r.large)},
                             {"stage_wins", stages},
                             {"size_buckets", buckets}};
    return j.dump(2) + "\n";
}

std::string records_csv(const std::vector<BenchRecord>& records)
{
    std::ostringstream out;
    out << "scene,code_id,payload_b64,patch_area,detected,decoded,matched,winning_stage,failure_reason\n";
    for (const auto& r : records) {
        out << r.scene << ',' << r.code_id << ',' << base64_encode(r.payload) << ',' << r.patch_area << ','
            << r.detected << ',' << r.decoded << ',' << r.matched << ',';
        if (r.winning_stage)
            out << *r.winning_stage;
        out << ',' << to_string(r.failure) << '\n';
    }
    return out.str();
}

std::string size_curve_csv(const BenchReport& report)
{
    std::ostringstream out;
    out << "bucket_min_sqpx,bucket_max_sqpx,n,success_rate\n";
    for (const auto& b : report.size_buckets) {
        out << b.min_sqpx << ',';
        if (b.max_sqpx)
            out << *b.max_sqpx;
        out << ',' << b.n << ',' << fixed6(b.success_rate()) << '\n';
    }
    return out.str();
}

void write_report(const std::filesystem::path& dir, const BenchResult& result)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / "report.json", report_json(result.report));
    write_text(dir / "records.csv", records_csv(result.records));
    write_text(dir / "size_curve.csv", size_curve_csv(result.report));
}

std::filesystem::path write_corpus(const std::filesystem::path& dir, const std::vector<SceneSpec>& scenes)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04zu.pgm", i);
        Scene scene = synthesize_scene(scenes[i]);
        write_pgm_file((dir / name).string(), scene.image);
        ManifestEntry e{name, {}, scenes[i], scenes[i].seed};
        for (const auto& t : scene.truth)
            e.codes.push_back({t.payload, t.box});
        entries.push_back(std::move(e));
    }
    auto manifest = dir / "manifest.jsonl";
    write_manifest(manifest, entries);
    return manifest;
}

} // namespace egoqr
