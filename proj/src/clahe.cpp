// SPDX-License-Identifier: Apache-2.0

#include "egoqr/enhance.hpp"
#include "egoqr/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace egoqr {

double clahe_clip_limit(double beta, int tile_pixels)
{
    return std::max(1.0, beta * tile_pixels / 256.0);
}

Histogram clip_histogram(const Histogram& hist, double limit)
{
    const long long cap = static_cast<long long>(std::floor(limit));
    if (*std::max_element(hist.begin(), hist.end()) <= cap)
        return hist;

    auto excess = [&](long long c) {
        long long e = 0;
        for (int h : hist)
            e += std::max(0LL, h - c);
        return e;
    };
    // c + excess(c) / 256 is nondecreasing in c, so the highest admissible cut is found by bisection
    long long lo = 0, hi = cap;
    while (lo < hi) {
        long long mid = (lo + hi + 1) / 2;
        if (mid + excess(mid) / 256 <= cap)
            lo = mid;
        else
            hi = mid - 1;
    }
    const long long cut = lo;
    const long long removed = excess(cut);

    Histogram out;
    for (int v = 0; v < 256; ++v)
        out[v] = static_cast<int>(std::min<long long>(hist[v], cut) + removed / 256 + (v < removed % 256 ? 1 : 0));
    return out;
}

namespace {

struct AxisWeight
{
    int k0 = 0;
    int k1 = 0;
    double w = 0; ///< weight of k1
};

std::vector<int> tile_bounds(int length, int n)
{
    std::vector<int> b(n + 1);
    for (int k = 0; k <= n; ++k)
        b[k] = static_cast<int>(static_cast<long long>(k) * length / n);
    return b;
}

std::vector<AxisWeight> axis_weights(const std::vector<int>& bounds, int length)
{
    const int n = static_cast<int>(bounds.size()) - 1;
    std::vector<double> centers(n);
    for (int k = 0; k < n; ++k)
        centers[k] = (bounds[k] + bounds[k + 1]) / 2.0;

    std::vector<AxisWeight> out(length);
    int k = 0;
    for (int i = 0; i < length; ++i) {
        double p = i + 0.5;
        while (k + 1 < n && centers[k + 1] <= p)
            ++k;
        if (p <= centers[0])
            out[i] = {0, 0, 0};
        else if (k == n - 1)
            out[i] = {n - 1, n - 1, 0};
        else
            out[i] = {k, k + 1, (p - centers[k]) / (centers[k + 1] - centers[k])};
    }
    return out;
}

} // namespace

GrayImage clahe(const GrayImage& img, double beta, int tile_grid)
{
    if (!(beta >= 1.0))
        throw std::invalid_argument("CLAHE clip limit must be at least 1");
    if (tile_grid < 1)
        throw std::invalid_argument("CLAHE tile grid must be at least 1x1");
    if (img.width() < 2 * tile_grid || img.height() < 2 * tile_grid)
        throw GeometryError("CLAHE tiles would be smaller than 2x2");

    const int n = tile_grid;
    auto xb = tile_bounds(img.width(), n);
    auto yb = tile_bounds(img.height(), n);

    std::vector<std::array<std::uint8_t, 256>> luts(static_cast<std::size_t>(n) * n);
    for (int ty = 0; ty < n; ++ty)
        for (int tx = 0; tx < n; ++tx) {
            Histogram hist{};
            for (int y = yb[ty]; y < yb[ty + 1]; ++y)
                for (int x = xb[tx]; x < xb[tx + 1]; ++x)
                    ++hist[img(x, y)];
            const long long pixels = static_cast<long long>(xb[tx + 1] - xb[tx]) * (yb[ty + 1] - yb[ty]);
            hist = clip_histogram(hist, clahe_clip_limit(beta, static_cast<int>(pixels)));
            auto& lut = luts[static_cast<std::size_t>(ty) * n + tx];
            long long cdf = 0;
            for (int v = 0; v < 256; ++v) {
                cdf += hist[v];
                lut[v] = static_cast<std::uint8_t>((cdf * 510 + pixels) / (2 * pixels));
            }
        }

    auto wx = axis_weights(xb, img.width());
    auto wy = axis_weights(yb, img.height());
    GrayImage out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        const auto& ay = wy[y];
        for (int x = 0; x < img.width(); ++x) {
            const auto& ax = wx[x];
            const auto v = img(x, y);
            auto at = [&](int ty, int tx) { return static_cast<double>(luts[static_cast<std::size_t>(ty) * n + tx][v]); };
            double top = (1 - ax.w) * at(ay.k0, ax.k0) + ax.w * at(ay.k0, ax.k1);
            double bottom = (1 - ax.w) * at(ay.k1, ax.k0) + ax.w * at(ay.k1, ax.k1);
            double r = (1 - ay.w) * top + ay.w * bottom;
            out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(r + 0.5), 0.0, 255.0));
        }
    }
    return out;
}

} // namespace egoqr
