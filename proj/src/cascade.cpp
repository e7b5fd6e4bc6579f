// SPDX-License-Identifier: Apache-2.0

#include "egoqr/cascade.hpp"

#include "egoqr/error.hpp"
#include "egoqr/symbol_reader.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace egoqr {

bool Stage::is_identity() const
{
    return scale == 1.0 && polarity == Polarity::Original && binarizer == BinarizerKind::GlobalOtsu &&
           morphology == Morphology::None && !super_resolution;
}

std::string Stage::label() const
{
    std::ostringstream s;
    if (super_resolution)
        s << "sr+";
    if (scale != 1.0)
        s << "scale" << scale << "+";
    if (polarity == Polarity::Inverted)
        s << "invert+";
    if (binarizer == BinarizerKind::Clahe)
        s << "clahe" << clahe_beta << "+";
    if (morphology == Morphology::Dilate)
        s << "dilate+";
    if (morphology == Morphology::Erode)
        s << "erode+";
    s << "otsu";
    return s.str();
}

std::string_view to_string(StageOutcome outcome)
{
    switch (outcome) {
    case StageOutcome::Success: return "success";
    case StageOutcome::DecodeFailure: return "decode-failure";
    case StageOutcome::Skipped: return "skipped";
    }
    return "?";
}

EnhancementPlan build_default_plan(const PlanConfig& config)
{
    if (config.scales.empty())
        throw std::invalid_argument("enhancement plan needs at least one scale");
    for (double s : config.scales)
        if (!(s > 0))
            throw std::invalid_argument("scale factors must be positive");
    for (double b : config.clahe_betas)
        if (!(b >= 1.0))
            throw std::invalid_argument("CLAHE clip limits must be at least 1");

    const Polarity both[] = {Polarity::Original, Polarity::Inverted};
    EnhancementPlan plan;
    plan.stages.push_back({});
    plan.stages.push_back({.polarity = Polarity::Inverted});
    for (double beta : config.clahe_betas)
        for (auto p : both)
            plan.stages.push_back({.polarity = p, .binarizer = BinarizerKind::Clahe, .clahe_beta = beta});
    for (double s : config.scales) {
        if (s == 1.0)
            continue;
        for (auto p : both)
            plan.stages.push_back({.scale = s, .polarity = p});
    }
    if (config.morphology)
        for (auto m : {Morphology::Dilate, Morphology::Erode})
            for (auto p : both) {
                if (p == Polarity::Inverted && !config.invert_morphology)
                    continue;
                plan.stages.push_back({.polarity = p, .morphology = m});
            }
    if (config.super_resolution)
        for (auto p : both) {
            if (p == Polarity::Inverted && !config.invert_super_resolution)
                continue;
            plan.stages.push_back({.polarity = p, .super_resolution = true});
        }
    return plan;
}

GrayImage apply_stage(const GrayImage& patch, const Stage& stage, const CascadeOptions& options)
{
    GrayImage img = patch;
    if (stage.super_resolution) {
        if (!options.resolver)
            throw Error("no super-resolver configured");
        img = options.resolver->upscale(img);
    }
    if (stage.scale != 1.0) {
        int w = std::max(1, static_cast<int>(std::lround(img.width() * stage.scale)));
        int h = std::max(1, static_cast<int>(std::lround(img.height() * stage.scale)));
        img = stage.scale < 1.0 ? resize_area(img, w, h) : resize(img, w, h);
    }
    if (stage.polarity == Polarity::Inverted)
        img = invert(img);
    if (stage.binarizer == BinarizerKind::Clahe)
        img = clahe(img, stage.clahe_beta, options.clahe_tiles);
    if (stage.morphology == Morphology::Dilate)
        img = dilate(img, StructuringElement::rectangle(3, 3));
    else if (stage.morphology == Morphology::Erode)
        img = erode(img, StructuringElement::rectangle(3, 3));
    return binarize_otsu(img);
}

PatchDecode decode_patch(const GrayImage& patch, const EnhancementPlan& plan, const CascadeOptions& options)
{
    using Clock = std::chrono::steady_clock;
    PatchDecode out;
    const bool sr_allowed = std::min(patch.width(), patch.height()) < options.sr_max_side;
    for (std::size_t i = 0; i < plan.stages.size(); ++i) {
        const Stage& stage = plan.stages[i];
        StageResult r{static_cast<int>(i), false, StageOutcome::Skipped, 0};
        if (!out.payload && !patch.empty() && (!stage.super_resolution || sr_allowed)) {
            r.attempted = true;
            auto start = Clock::now();
            try {
                out.payload = read_symbol(apply_stage(patch, stage, options));
            } catch (const Error&) {
            } catch (const std::invalid_argument&) {
            }
            r.outcome = out.payload ? StageOutcome::Success : StageOutcome::DecodeFailure;
            if (out.payload)
                out.success_stage = static_cast<int>(i);
            r.elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
        }
        out.stages.push_back(r);
    }
    return out;
}

} // namespace egoqr
