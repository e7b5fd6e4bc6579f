// SPDX-License-Identifier: Apache-2.0
// Locates a symbol inside a binarized patch and decodes it.
#pragma once

#include "egoqr/detector.hpp"
#include "egoqr/grid_sampler.hpp"
#include "egoqr/qr_decoder.hpp"

#include <optional>
#include <vector>

namespace egoqr {

struct SymbolGeometry
{
    int side = 0;
    Homography module_to_image;
    bool used_alignment = false;
};

/// Candidate sampling geometries for a finder triple: the estimated side first, then +-4 modules;
/// for version >= 2 each side is tried with the located alignment pattern and then with the
/// parallelogram estimate.
std::vector<SymbolGeometry> candidate_geometries(const GrayImage& binary, const FinderTriple& triple);

/// Center of a 1:1:1 alignment pattern nearest to `predicted` within `radius` pixels.
std::optional<PointF> find_alignment_pattern(const GrayImage& binary, PointF predicted, double module_size,
                                             double radius);

/// Tries every finder triple found in `binary` (0 = dark) until a geometry decodes.
std::optional<DecodedPayload> read_symbol(const GrayImage& binary);

} // namespace egoqr
