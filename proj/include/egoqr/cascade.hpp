// SPDX-License-Identifier: Apache-2.0
// Ordered enhancement attempts over a detected patch, stopping at the first decode.
#pragma once

#include "egoqr/enhance.hpp"
#include "egoqr/qr_decoder.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace egoqr {

enum class Polarity { Original, Inverted };
enum class BinarizerKind { GlobalOtsu, Clahe };
enum class Morphology { None, Dilate, Erode };

struct Stage
{
    double scale = 1.0;
    Polarity polarity = Polarity::Original;
    BinarizerKind binarizer = BinarizerKind::GlobalOtsu;
    double clahe_beta = 0; ///< used when binarizer is Clahe
    Morphology morphology = Morphology::None;
    bool super_resolution = false;

    bool is_identity() const;
    std::string label() const;
    bool operator==(const Stage&) const = default;
};

struct EnhancementPlan
{
    std::vector<Stage> stages;
};

struct PlanConfig
{
    std::vector<double> scales{0.5, 0.75, 1.5, 2.0};
    std::vector<double> clahe_betas{2.0, 4.0};
    bool morphology = true;
    bool super_resolution = true;
    bool invert_morphology = false; ///< also run the morphology stages on the inverted patch
    bool invert_super_resolution = true;
};

/// Identity, inverted, CLAHE per beta (both polarities), each scale other than 1.0 (both polarities),
/// dilate and erode, then the super-resolution stages. Throws std::invalid_argument for an empty scale set.
EnhancementPlan build_default_plan(const PlanConfig& config = {});

enum class StageOutcome { Success, DecodeFailure, Skipped };
std::string_view to_string(StageOutcome outcome);

struct StageResult
{
    int stage_index = 0;
    bool attempted = false;
    StageOutcome outcome = StageOutcome::Skipped;
    long long elapsed_us = 0;

    /// Equality ignoring the wall-clock measurement.
    bool same_outcome(const StageResult& o) const
    {
        return stage_index == o.stage_index && attempted == o.attempted && outcome == o.outcome;
    }
};

struct CascadeOptions
{
    std::shared_ptr<const SuperResolver> resolver = default_super_resolver();
    int sr_max_side = 192; ///< super-resolution runs only when min(patch side) is below this
    int clahe_tiles = 8;
};

struct PatchDecode
{
    std::optional<DecodedPayload> payload;
    std::optional<int> success_stage;
    std::vector<StageResult> stages;
};

/// The patch after the stage's transforms, in order: super-resolution, scale, polarity, CLAHE,
/// morphology, Otsu binarization. Throws when a transform cannot be applied (e.g. CLAHE tiles too small).
GrayImage apply_stage(const GrayImage& patch, const Stage& stage, const CascadeOptions& options = {});

/// Runs the stages in order until one decodes; every later stage is reported as skipped, and so are
/// super-resolution stages on patches whose smaller side is at least options.sr_max_side.
PatchDecode decode_patch(const GrayImage& patch, const EnhancementPlan& plan, const CascadeOptions& options = {});

} // namespace egoqr
