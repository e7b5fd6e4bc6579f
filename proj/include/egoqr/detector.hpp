// SPDX-License-Identifier: Apache-2.0
// Thumbnail based QR localization: finder pattern search, grouping and back-projection.
#pragma once

#include "egoqr/image.hpp"

#include <array>
#include <vector>

namespace egoqr {

struct FinderPattern
{
    PointF center;
    double module_size = 0;
    int hits = 1; ///< number of merged scan-line confirmations
};

/// Three finders ordered top-left (the right-angle corner), top-right, bottom-left in symbol space.
struct FinderTriple
{
    std::array<FinderPattern, 3> finders;
    double module_size = 0; ///< mean of the three
    double error = 0;       ///< geometric inconsistency, 0 for a perfect square
};

struct Detection
{
    BoundingBox box;
    double score = 0;
    std::vector<PointF> finder_centers; ///< up to 3 supporting centers, same coordinates as box
};

struct Thumbnail
{
    GrayImage image;
    double scale_x = 1; ///< source width / thumbnail width
    double scale_y = 1;
};

struct DetectorConfig
{
    int thumb_max_width = 576;
    int thumb_max_height = 432;
    /// Also search local-mean binarizations of the thumbnail and of its x2 enlargement.
    bool adaptive_passes = true;
    /// Add low-score boxes for dense high-contrast texture not explained by finder evidence.
    bool texture_fallback = true;
};

/// Pixel becomes dark when at or below the mean of its (2r+1)^2 window; windows whose standard
/// deviation is under `min_stddev` use `fallback_threshold` instead.
GrayImage binarize_local_mean(const GrayImage& img, int radius, int fallback_threshold, double min_stddev = 10.0);

/// Thumbnail box to full resolution: floor of the scaled start, last pixel before the scaled end, clamped.
BoundingBox to_full_resolution(const BoundingBox& thumb_box, double scale_x, double scale_y, int width, int height);

/// Square-ish regions of dense strong edges (thumbnail coordinates): candidate symbols whose
/// modules are too small for run-length finder matching.
std::vector<BoundingBox> find_texture_regions(const GrayImage& thumb);

/// Aspect preserving fit inside the configured maximum; smaller sources are not upscaled.
Thumbnail make_thumbnail(const GrayImage& img, int max_width = 576, int max_height = 432);

/// 1:1:3:1:1 run search on a binarized image (0 = dark). Every row hit is confirmed on the vertical
/// and diagonal through the candidate center; candidates closer than 2 module sizes are merged.
std::vector<FinderPattern> find_finder_patterns(const GrayImage& binary);

/// Triples of mutually consistent finders (module size ratio <= 1.6, right angle 90 +- 20 degrees,
/// legs within the version 1..10 range), chosen greedily by increasing error; no finder is reused.
std::vector<FinderTriple> match_triples(const std::vector<FinderPattern>& patterns);

/// Boxes from triples (symbol extent plus one module, score >= 0.9) and from leftover pairs and
/// single finders (score 0.3), clamped to width x height.
std::vector<Detection> group_finders_to_boxes(const std::vector<FinderPattern>& patterns, int width, int height);

/// Thumbnail, Otsu binarization, finder search, grouping, back-projection to source coordinates.
/// Sorted by score descending, then larger area.
std::vector<Detection> detect(const GrayImage& img, const DetectorConfig& config = {});

} // namespace egoqr
