// SPDX-License-Identifier: Apache-2.0

#include "egoqr/fulfillment.hpp"

#include <algorithm>
#include <limits>

namespace egoqr {

namespace {

constexpr double kTieEpsilon = 1e-6;

/// Total order used for every final tie: larger area first, then smaller box, then smaller payload.
bool preferred(const Candidate& a, const Candidate& b)
{
    if (a.detection.box.area() != b.detection.box.area())
        return a.detection.box.area() > b.detection.box.area();
    if (a.detection.box != b.detection.box)
        return a.detection.box < b.detection.box;
    return a.payload.bytes < b.payload.bytes;
}

std::optional<Candidate> best_of(const std::vector<Candidate>& candidates)
{
    if (candidates.empty())
        return std::nullopt;
    return *std::min_element(candidates.begin(), candidates.end(), preferred);
}

bool same_code(const Candidate& a, const Candidate& b)
{
    return a.payload.bytes == b.payload.bytes &&
           (a.detection.box.contains(b.detection.box.center()) || b.detection.box.contains(a.detection.box.center()));
}

} // namespace

std::string_view to_string(ScanStatus status)
{
    switch (status) {
    case ScanStatus::Selected: return "selected";
    case ScanStatus::NoCodeFound: return "no_code_found";
    case ScanStatus::CodeUnclear: return "code_unclear";
    }
    return "?";
}

std::vector<Candidate> shortlist_by_roi(const std::vector<Candidate>& candidates, const BoundingBox& roi)
{
    std::vector<Candidate> out;
    for (const auto& c : candidates)
        if (roi.contains(c.detection.box.center()))
            out.push_back(c);
    return out;
}

std::optional<Candidate> select_by_pointing(const std::vector<Candidate>& candidates, const Ray& ray)
{
    std::vector<std::pair<double, const Candidate*>> hits;
    for (const auto& c : candidates)
        if (auto t = intersect_ray_box(ray, c.detection.box))
            hits.emplace_back(*t, &c);
    if (hits.empty())
        return std::nullopt;
    double t_min = std::numeric_limits<double>::infinity();
    for (const auto& h : hits)
        t_min = std::min(t_min, h.first);
    std::vector<Candidate> nearest;
    for (const auto& h : hits)
        if (h.first <= t_min + kTieEpsilon)
            nearest.push_back(*h.second);
    return best_of(nearest);
}

std::optional<Candidate> disambiguate(const std::vector<Candidate>& candidates, const ScanContext& ctx)
{
    if (candidates.empty())
        return std::nullopt;
    if (ctx.pointing)
        if (auto hit = select_by_pointing(candidates, *ctx.pointing))
            return hit;
    if (ctx.roi) {
        auto inside = shortlist_by_roi(candidates, *ctx.roi);
        if (!inside.empty())
            return best_of(inside);
    }
    return best_of(candidates);
}

ScanOutcome scan(const GrayImage& img, const ScanContext& ctx, const ScanConfig& config)
{
    ScanOutcome out;
    const auto plan = config.plan_override ? *config.plan_override : build_default_plan(config.plan);
    auto detections = detect(img, config.detector);

    for (const auto& det : detections) {
        auto crop = crop_with_margin(img, det.box, config.margin);
        PatchAttempt attempt{det, crop.source, decode_patch(crop.patch, plan, config.cascade)};
        if (attempt.decode.payload) {
            Candidate c{det, *attempt.decode.payload};
            bool repeat = std::any_of(out.all_decoded.begin(), out.all_decoded.end(),
                                      [&](const Candidate& o) { return same_code(o, c); });
            if (!repeat)
                out.all_decoded.push_back(c);
        }
        out.attempts.push_back(std::move(attempt));
    }

    if (detections.empty()) {
        out.status = ScanStatus::NoCodeFound;
        out.feedback = feedback::kNoCodeFound;
    } else if (out.all_decoded.empty()) {
        out.status = ScanStatus::CodeUnclear;
        bool all_small = std::all_of(detections.begin(), detections.end(),
                                     [&](const Detection& d) { return d.box.area() <= config.small_code_area; });
        out.feedback = all_small && ctx.attempt >= 1 ? feedback::kCodeTooSmall : feedback::kCodeUnclear;
    } else {
        out.status = ScanStatus::Selected;
        out.selected = disambiguate(out.all_decoded, ctx);
        out.feedback = feedback::kOk;
    }
    return out;
}

} // namespace egoqr
