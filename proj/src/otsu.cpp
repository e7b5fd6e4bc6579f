// SPDX-License-Identifier: Apache-2.0

#include "egoqr/enhance.hpp"

namespace egoqr {

namespace {

// Above this pixel count the exact 128-bit comparison could overflow.
constexpr std::uint64_t kExactLimit = 4'000'000;

} // namespace

OtsuResult otsu_threshold(const GrayImage& img)
{
    std::array<std::uint64_t, 256> hist{};
    for (auto p : img.pixels())
        ++hist[p];

    int distinct = 0, only = 0;
    for (int v = 0; v < 256; ++v)
        if (hist[v]) {
            ++distinct;
            only = v;
        }
    if (distinct <= 1)
        return {only, true};

    // Minimizing the within-class variance is maximizing F = s1^2/n1 + s2^2/n2 (an empty class adds
    // nothing, so F = S^2/N there). Candidates are compared as exact fractions num/den.
    const std::uint64_t n = img.size();
    std::uint64_t total = 0;
    for (int v = 0; v < 256; ++v)
        total += hist[v] * static_cast<std::uint64_t>(v);

    using u128 = unsigned __int128;
    const bool exact = n <= kExactLimit;
    u128 best_num = 0, best_den = 1;
    long double best_f = -1;
    int best_t = -1;
    std::uint64_t n1 = 0, s1 = 0;
    for (int t = 0; t < 255; ++t) {
        n1 += hist[t];
        s1 += hist[t] * static_cast<std::uint64_t>(t);
        const std::uint64_t n2 = n - n1, s2 = total - s1;
        u128 num, den;
        if (n1 == 0 || n2 == 0) {
            num = static_cast<u128>(total) * total;
            den = n;
        } else {
            num = static_cast<u128>(s1) * s1 * n2 + static_cast<u128>(s2) * s2 * n1;
            den = static_cast<u128>(n1) * n2;
        }
        bool better;
        if (exact) {
            better = best_t < 0 || num * best_den > best_num * den;
        } else {
            long double f = static_cast<long double>(num) / static_cast<long double>(den);
            better = best_t < 0 || f > best_f;
            if (better)
                best_f = f;
        }
        if (better) {
            best_num = num;
            best_den = den;
            best_t = t;
        }
    }
    return {best_t, false};
}

GrayImage binarize(const GrayImage& img, int threshold)
{
    GrayImage out = img;
    for (auto& p : out.pixels())
        p = p <= threshold ? 0 : 255;
    return out;
}

GrayImage binarize_otsu(const GrayImage& img)
{
    return binarize(img, otsu_threshold(img).threshold);
}

} // namespace egoqr
