// SPDX-License-Identifier: Apache-2.0
// Patch enhancement primitives used by the decoding cascade.
#pragma once

#include "egoqr/image.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>

namespace egoqr {

struct OtsuResult
{
    int threshold = 0;       ///< class 1 is {pixels <= threshold}
    bool degenerate = false; ///< the image holds a single intensity; threshold is that intensity
};

/// Global threshold minimizing the within-class variance over t in [0, 254]; ties go to the smallest t.
OtsuResult otsu_threshold(const GrayImage& img);

/// pixels <= threshold -> 0, others -> 255
GrayImage binarize(const GrayImage& img, int threshold);

/// binarize(img, otsu_threshold(img).threshold); a single-valued image becomes all 0.
GrayImage binarize_otsu(const GrayImage& img);

using Histogram = std::array<int, 256>;

/// Clip limit in counts for a tile of `tile_pixels` pixels: max(1, beta * tile_pixels / 256).
double clahe_clip_limit(double beta, int tile_pixels);

/// Clips `hist` and redistributes the removed mass over all bins so the total is preserved and
/// no bin ends above floor(limit) + 1. Bins are cut at the highest level c for which
/// c + excess(c) / 256 stays within the limit; the excess is spread evenly and the remainder
/// one count per bin from bin 0 upwards. A histogram already within the limit is returned as is.
Histogram clip_histogram(const Histogram& hist, double limit);

/// Contrast limited adaptive histogram equalization on a tile_grid x tile_grid layout.
/// Tile k spans [floor(k*W/n), floor((k+1)*W/n)). Each tile maps v to round(cdf(v) * 255 / pixels)
/// of its clipped histogram; pixels blend the four nearest tile maps bilinearly by tile center,
/// clamping at the border. Throws std::invalid_argument for beta < 1 or tile_grid < 1 and
/// GeometryError when a tile would be smaller than 2x2.
GrayImage clahe(const GrayImage& img, double beta, int tile_grid = 8);

/// Flat grayscale dilation: max of I(x - i, y - j) over offsets (i, j) of K, edges replicated.
GrayImage dilate(const GrayImage& img, const StructuringElement& k);
/// Flat grayscale erosion: min of I(x + i, y + j) over offsets (i, j) of K, edges replicated.
GrayImage erode(const GrayImage& img, const StructuringElement& k);

/// x2 upscaler applied to small patches as the last cascade attempt.
class SuperResolver
{
public:
    virtual ~SuperResolver() = default;
    /// Output is exactly scale_factor() times the input in each dimension. Throws Error on failure.
    virtual GrayImage upscale(const GrayImage& img) const = 0;
    virtual std::string identity() const = 0;
    int scale_factor() const { return 2; }
};

/// Bilinear x2 followed by an unsharp mask (3x3 box blur, amount 1.0, clamped).
class SharpenUpscaler : public SuperResolver
{
public:
    GrayImage upscale(const GrayImage& img) const override;
    std::string identity() const override { return "bilinear-unsharp-x2"; }
};

/// Runs an executable that reads a PGM on stdin and writes the x2 PGM on stdout.
/// A nonzero exit, a malformed reply or wrong dimensions raise Error.
class ExternalResolver : public SuperResolver
{
public:
    explicit ExternalResolver(std::string executable);
    GrayImage upscale(const GrayImage& img) const override;
    std::string identity() const override { return "exec:" + _executable; }

private:
    std::string _executable;
};

std::shared_ptr<const SuperResolver> default_super_resolver();

} // namespace egoqr
