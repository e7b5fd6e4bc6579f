// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "egoqr/image.hpp"
#include "egoqr/qr_symbol.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>

namespace egoqr {

/// Planar projective transform.
class Homography
{
public:
    /// Maps src[i] onto dst[i] for the four correspondences. Throws GeometryError when either
    /// quadrilateral is degenerate (three collinear points or zero area).
    static Homography from_quads(const std::array<PointF, 4>& src, const std::array<PointF, 4>& dst);
    /// Least-squares fit over at least four correspondences (normalized DLT, h33 = 1).
    /// Throws GeometryError when the points do not determine a transform.
    static Homography fit(std::span<const PointF> src, std::span<const PointF> dst);
    /// Unit square (0,0),(1,0),(1,1),(0,1) onto `quad`.
    static Homography square_to_quad(const std::array<PointF, 4>& quad);

    PointF map(PointF p) const;
    Homography inverse() const;
    Homography then(const Homography& next) const; ///< apply *this, then next

private:
    std::array<double, 9> _m{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

/// Throws GeometryError when any three of the four points are (nearly) collinear.
void check_quad(const std::array<PointF, 4>& quad);

/// Decides dark (true) from an intensity.
using Binarizer = std::function<bool(std::uint8_t)>;

/// dark iff value <= threshold
Binarizer threshold_binarizer(int threshold);

/// `corners` are the outer symbol corners in image space ordered TL, TR, BR, BL (pixel (x, y)
/// covers [x, x+1) x [y, y+1)). Each module center is mapped through the homography and the
/// pixel under it is classified; samples falling outside the image read as light.
BitMatrix sample_grid(const GrayImage& img, const std::array<PointF, 4>& corners, int side, const Binarizer& binarizer);

/// Same, with an explicit module-space (module units, origin at the TL symbol corner) to image transform.
BitMatrix sample_grid(const GrayImage& img, const Homography& module_to_image, int side, const Binarizer& binarizer);

} // namespace egoqr
