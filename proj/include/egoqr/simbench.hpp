// SPDX-License-Identifier: Apache-2.0
// Synthetic degraded scenes and the evaluation harness built on them.
#pragma once

#include "egoqr/fulfillment.hpp"
#include "egoqr/grid_sampler.hpp"
#include "egoqr/qr_symbol.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace egoqr {

struct DegradationSpec
{
    double perspective_tilt = 0; ///< degrees, rotation of the code plane about its vertical axis
    double rotation = 0;         ///< degrees, in-plane
    double motion_length = 0;    ///< pixels
    double motion_angle = 0;     ///< degrees
    double gaussian_sigma = 0;   ///< pixels
    double downscale = 1.0;      ///< in (0, 1]; resampled down and back up
    double noise_sigma = 0;      ///< intensity levels
    int illumination_axis = 0;   ///< 0 = left to right, 1 = top to bottom
    double illumination_strength = 0; ///< in [0, 1): brightness falls to 1 - strength across the window

    /// Throws std::invalid_argument when a magnitude is negative or out of range.
    void validate() const;
    bool operator==(const DegradationSpec&) const = default;
};

enum class BackgroundKind { Flat, Texture };

struct Background
{
    BackgroundKind kind = BackgroundKind::Flat;
    int level = 170;
    std::uint64_t texture_seed = 0;
    bool operator==(const Background&) const = default;
};

struct SceneCode
{
    std::vector<std::uint8_t> payload;
    EcLevel ec_level = EcLevel::M;
    std::optional<int> version;
    double module_px = 4;
    PointF center;  ///< symbol center on the canvas before degradation
    DegradationSpec degradation;
    bool operator==(const SceneCode&) const = default;
};

struct SceneSpec
{
    int width = 1152;
    int height = 864;
    Background background;
    std::vector<SceneCode> codes;
    std::uint64_t seed = 0; ///< drives the noise only
    bool operator==(const SceneSpec&) const = default;
};

struct GroundTruth
{
    std::vector<std::uint8_t> payload;
    BoundingBox box; ///< bounding rectangle of the warped symbol corners, quiet zone excluded
    std::array<PointF, 4> corners; ///< TL, TR, BR, BL symbol corners
};

struct Scene
{
    GrayImage image;
    std::vector<GroundTruth> truth;
};

/// Maps symbol module coordinates (origin at the symbol's top-left corner) onto the canvas:
/// scale by module_px, in-plane rotation, then a pinhole view of the plane tilted about its vertical axis.
Homography code_placement(const SceneCode& code, int side);

/// Canvas bounds of the code including its 4-module quiet zone.
BoundingBox sticker_bounds(const SceneCode& code);

/// Renders each code with a 4-module quiet zone through its placement, then degrades a window around
/// it: gaussian blur, motion blur, down/up resampling, seeded noise, illumination gradient.
/// Throws GeometryError when a code leaves the canvas or two codes overlap.
Scene synthesize_scene(const SceneSpec& spec);

// degradation steps, exposed for testing
GrayImage gaussian_blur(const GrayImage& img, double sigma);
GrayImage motion_blur(const GrayImage& img, double length, double angle_deg);

struct ManifestCode
{
    std::vector<std::uint8_t> payload;
    BoundingBox box;
};

struct ManifestEntry
{
    std::string image_path; ///< relative to the manifest's directory unless absolute
    std::vector<ManifestCode> codes;
    std::optional<SceneSpec> spec;
    std::uint64_t seed = 0;
};

/// Single-object JSON form of a scene spec, as stored in the manifest. Parsing throws FormatError.
std::string scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(std::string_view text);

/// JSON lines, one scene per line. Throws FormatError on malformed content, IoError when unreadable.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

enum class FailureReason { None, NotDetected, SmallCodeMiss, DecodeFailed, WrongPayload };
std::string_view to_string(FailureReason reason);

struct BenchRecord
{
    std::size_t scene = 0;
    std::size_t code_id = 0; ///< index within the scene
    std::vector<std::uint8_t> payload;
    long long patch_area = 0; ///< truth box area, full resolution
    bool detected = false;
    bool decoded = false;
    bool matched = false;
    std::optional<int> winning_stage;
    FailureReason failure = FailureReason::None;
};

struct SizeBucket
{
    long long min_sqpx = 0; ///< exclusive
    std::optional<long long> max_sqpx; ///< inclusive; open ended when absent
    int n = 0;
    int matched = 0;
    double success_rate() const { return n ? static_cast<double>(matched) / n : 0.0; }
};

struct StageWins
{
    int index = 0;
    std::string label;
    int wins = 0;
};

struct BenchReport
{
    int total = 0;
    int detected = 0;
    int decoded = 0;
    int matched = 0;
    int small_code_misses = 0;
    double detection_rate = 0;
    double decoding_rate = 0; ///< matched / detected
    double end_to_end_rate = 0;
    std::vector<StageWins> stage_wins;
    std::vector<SizeBucket> size_buckets;
    SizeBucket small; ///< patch_area <= 10,000
    SizeBucket large; ///< patch_area > 10,000
};

struct BenchConfig
{
    ScanConfig scan;
    int threads = 0;                     ///< 0 = hardware concurrency
    std::vector<long long> bucket_edges{2'500, 5'000, 10'000, 20'000, 40'000, 80'000};
    double small_code_thumb_px = 15; ///< misses at or below this thumbnail size are small-code misses
};

struct BenchResult
{
    BenchReport report;
    std::vector<BenchRecord> records;
};

/// Scores every code of every scene (no disambiguation): detected at IoU >= 0.5, matched on exact bytes.
BenchResult run_bench(const std::vector<ManifestEntry>& manifest, const std::filesystem::path& base_dir,
                      const BenchConfig& config = {});
BenchResult run_bench(const std::filesystem::path& manifest_path, const BenchConfig& config = {});

/// Winning-stage counts per stage of the plan, as produced by a full-telemetry bench run.
std::vector<StageWins> ablate_stages(const BenchResult& result);

/// report.json (schema 1), records.csv and size_curve.csv; contents depend only on the inputs.
void write_report(const std::filesystem::path& dir, const BenchResult& result);
std::string report_json(const BenchReport& report);
std::string records_csv(const std::vector<BenchRecord>& records);
std::string size_curve_csv(const BenchReport& report);

/// Named corpora: clean, mild, lowres, sweep, size.
std::vector<std::string> preset_names();
/// Throws std::invalid_argument for an unknown name.
std::vector<SceneSpec> make_preset(const std::string& name, int scenes, std::uint64_t seed);

/// Renders every scene as scene_NNNN.pgm plus manifest.jsonl into `dir`; returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& dir, const std::vector<SceneSpec>& scenes);

} // namespace egoqr
