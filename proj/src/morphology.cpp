// SPDX-License-Identifier: Apache-2.0

#include "egoqr/enhance.hpp"

#include <algorithm>

namespace egoqr {

namespace {

template <typename Pick>
GrayImage flat_filter(const GrayImage& img, const StructuringElement& k, int sign, std::uint8_t init, Pick pick)
{
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            std::uint8_t acc = init;
            for (auto [i, j] : k.offsets())
                acc = pick(acc, img.clamped(x + sign * i, y + sign * j));
            out(x, y) = acc;
        }
    return out;
}

} // namespace

GrayImage dilate(const GrayImage& img, const StructuringElement& k)
{
    return flat_filter(img, k, -1, 0, [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

GrayImage erode(const GrayImage& img, const StructuringElement& k)
{
    return flat_filter(img, k, 1, 255, [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

} // namespace egoqr
