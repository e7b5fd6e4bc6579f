// SPDX-License-Identifier: Apache-2.0
// End-to-end scan: detection, per-patch cascade, choice of the intended code and user feedback.
#pragma once

#include "egoqr/cascade.hpp"
#include "egoqr/detector.hpp"

#include <optional>
#include <string>
#include <vector>

namespace egoqr {

struct Candidate
{
    Detection detection;
    DecodedPayload payload;
};

struct ScanContext
{
    std::optional<BoundingBox> roi;
    std::optional<Ray> pointing;
    int attempt = 0; ///< how many earlier scans of the same scene failed
};

enum class ScanStatus { Selected, NoCodeFound, CodeUnclear };
std::string_view to_string(ScanStatus status);

namespace feedback {
inline constexpr std::string_view kOk = "ok";
inline constexpr std::string_view kNoCodeFound = "no_code_found";
inline constexpr std::string_view kCodeUnclear = "code_unclear";
inline constexpr std::string_view kCodeTooSmall = "code_too_small";
} // namespace feedback

struct PatchAttempt
{
    Detection detection;
    BoundingBox crop; ///< source region handed to the cascade
    PatchDecode decode;
};

struct ScanOutcome
{
    ScanStatus status = ScanStatus::NoCodeFound;
    std::optional<Candidate> selected;
    std::vector<Candidate> all_decoded;
    std::string feedback;
    std::vector<PatchAttempt> attempts; ///< one per detection, in detection order
};

struct ScanConfig
{
    DetectorConfig detector;
    PlanConfig plan;
    std::optional<EnhancementPlan> plan_override; ///< used instead of build_default_plan(plan)
    CascadeOptions cascade;
    MarginPolicy margin;
    long long small_code_area = 10'000; ///< detections at or below this area count as small
};

/// Candidates whose box center lies inside `roi`, in input order.
std::vector<Candidate> shortlist_by_roi(const std::vector<Candidate>& candidates, const BoundingBox& roi);

/// The candidate whose box the ray enters first; entries within 1e-6 of the minimum go to the larger
/// area, then the smaller box coordinates.
std::optional<Candidate> select_by_pointing(const std::vector<Candidate>& candidates, const Ray& ray);

/// Pointing first, then the largest candidate centered in the ROI, then the largest overall.
std::optional<Candidate> disambiguate(const std::vector<Candidate>& candidates, const ScanContext& ctx);

/// Detect, crop each detection with margin, run the cascade, drop repeated reads of the same code,
/// pick the intended one and set the feedback key.
ScanOutcome scan(const GrayImage& img, const ScanContext& ctx = {}, const ScanConfig& config = {});

} // namespace egoqr
