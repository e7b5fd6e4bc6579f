// SPDX-License-Identifier: Apache-2.0

#include "egoqr/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace egoqr {

namespace {

constexpr double kRunTolerance = 0.5;
constexpr std::size_t kMaxTripleCandidates = 48;
constexpr double kMaxModuleRatio = 1.6;
constexpr double kMaxAngleDeviation = 20.0; // degrees
constexpr double kMinLegModules = 9.0;      // version 1 has 14 modules between finder centers
constexpr double kMaxLegModules = 65.0;     // version 10 has 50
constexpr double kMaxLegRatio = 1.6;

bool is_dark(const GrayImage& img, int x, int y)
{
    return img(x, y) < 128;
}

bool ratio_ok(const std::array<int, 5>& runs)
{
    static constexpr double kExpect[5] = {1, 1, 3, 1, 1};
    int total = 0;
    for (int r : runs) {
        if (r == 0)
            return false;
        total += r;
    }
    if (total < 7)
        return false;
    const double m = total / 7.0;
    for (int i = 0; i < 5; ++i)
        if (std::abs(runs[i] - kExpect[i] * m) > kRunTolerance * kExpect[i] * m)
            return false;
    return true;
}

struct CrossCheck
{
    std::array<int, 5> runs{};
    double center = 0; ///< continuous coordinate along the scan axis (in steps from the start pixel)
    int total() const { return runs[0] + runs[1] + runs[2] + runs[3] + runs[4]; }
};

/// Counts the five runs through (x, y) along (dx, dy); the start pixel must be dark.
/// Each run is capped at `max_run` pixels.
std::optional<CrossCheck> cross_check(const GrayImage& img, int x, int y, int dx, int dy, int max_run)
{
    auto inside = [&](int px, int py) { return px >= 0 && py >= 0 && px < img.width() && py < img.height(); };
    if (!inside(x, y) || !is_dark(img, x, y))
        return std::nullopt;

    // walks away from the center; returns run lengths [center part, light, dark]
    auto walk = [&](int sx, int sy) {
        std::array<int, 3> r{0, 0, 0};
        int px = x, py = y;
        for (int phase = 0; phase < 3; ++phase) {
            const bool want_dark = phase != 1;
            while (inside(px, py) && is_dark(img, px, py) == want_dark && r[phase] <= max_run) {
                ++r[phase];
                px += sx;
                py += sy;
            }
            if (r[phase] > max_run)
                return std::optional<std::array<int, 3>>{};
        }
        return std::optional<std::array<int, 3>>{r};
    };
    auto back = walk(-dx, -dy);
    auto fwd = walk(dx, dy);
    if (!back || !fwd)
        return std::nullopt;
    CrossCheck c;
    c.runs = {(*back)[2], (*back)[1], (*back)[0] + (*fwd)[0] - 1, (*fwd)[1], (*fwd)[2]};
    if (!ratio_ok(c.runs))
        return std::nullopt;
    // center run covers steps [-(back0 - 1), fwd0 - 1]; its continuous middle relative to the start pixel center
    c.center = ((*fwd)[0] - 1 - ((*back)[0] - 1)) / 2.0;
    return c;
}

void merge_candidate(std::vector<FinderPattern>& found, PointF center, double module_size)
{
    for (auto& f : found) {
        double reach = 2.0 * std::max(f.module_size, module_size);
        if (distance(f.center, center) < reach) {
            double w = f.hits;
            f.center = (1.0 / (w + 1)) * (w * f.center + center);
            f.module_size = (w * f.module_size + module_size) / (w + 1);
            ++f.hits;
            return;
        }
    }
    found.push_back({center, module_size, 1});
}

} // namespace

std::vector<FinderPattern> find_finder_patterns(const GrayImage& binary)
{
    std::vector<FinderPattern> found;
    if (binary.empty())
        return found;

    std::vector<std::pair<int, int>> runs; // (start, length), alternating colors
    for (int y = 0; y < binary.height(); ++y) {
        runs.clear();
        bool first_dark = is_dark(binary, 0, y);
        int start = 0;
        for (int x = 1; x <= binary.width(); ++x)
            if (x == binary.width() || is_dark(binary, x, y) != is_dark(binary, x - 1, y)) {
                runs.emplace_back(start, x - start);
                start = x;
            }
        for (std::size_t i = first_dark ? 0 : 1; i + 4 < runs.size(); i += 2) {
            std::array<int, 5> r{runs[i].second, runs[i + 1].second, runs[i + 2].second, runs[i + 3].second,
                                 runs[i + 4].second};
            if (!ratio_ok(r))
                continue;
            const int total_h = r[0] + r[1] + r[2] + r[3] + r[4];
            const int max_run = std::max(4, total_h);
            const double cx = runs[i + 2].first + runs[i + 2].second / 2.0;

            auto v = cross_check(binary, static_cast<int>(cx), y, 0, 1, max_run);
            if (!v || v->total() * 2 < total_h || v->total() > total_h * 2)
                continue;
            const double cy = y + 0.5 + v->center;
            auto h = cross_check(binary, static_cast<int>(cx), static_cast<int>(cy), 1, 0, max_run);
            if (!h)
                continue;
            const double rx = static_cast<int>(cx) + 0.5 + h->center;
            auto d = cross_check(binary, static_cast<int>(rx), static_cast<int>(cy), 1, 1, max_run);
            if (!d)
                continue;
            const double module = (h->total() + v->total()) / 14.0;
            merge_candidate(found, {rx, cy}, module);
        }
    }
    return found;
}

std::vector<FinderTriple> match_triples(const std::vector<FinderPattern>& patterns)
{
    std::vector<std::size_t> order(patterns.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return patterns[a].hits > patterns[b].hits; });
    if (order.size() > kMaxTripleCandidates)
        order.resize(kMaxTripleCandidates);

    struct Scored
    {
        FinderTriple triple;
        std::array<std::size_t, 3> ids;
    };
    std::vector<Scored> all;
    const std::size_t n = order.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            for (std::size_t c = b + 1; c < n; ++c) {
                std::array<std::size_t, 3> ids{order[a], order[b], order[c]};
                std::array<const FinderPattern*, 3> p{&patterns[ids[0]], &patterns[ids[1]], &patterns[ids[2]]};
                double mmin = std::min({p[0]->module_size, p[1]->module_size, p[2]->module_size});
                double mmax = std::max({p[0]->module_size, p[1]->module_size, p[2]->module_size});
                if (mmax > kMaxModuleRatio * mmin)
                    continue;
                // the corner opposite the longest side is top-left
                double d01 = distance(p[0]->center, p[1]->center), d02 = distance(p[0]->center, p[2]->center),
                       d12 = distance(p[1]->center, p[2]->center);
                int tl = d12 >= d01 && d12 >= d02 ? 0 : (d02 >= d01 ? 1 : 2);
                int i1 = (tl + 1) % 3, i2 = (tl + 2) % 3;
                PointF v1 = p[i1]->center - p[tl]->center, v2 = p[i2]->center - p[tl]->center;
                double l1 = std::hypot(v1.x, v1.y), l2 = std::hypot(v2.x, v2.y);
                if (l1 == 0 || l2 == 0)
                    continue;
                double angle = std::acos(std::clamp(dot(v1, v2) / (l1 * l2), -1.0, 1.0)) * 180.0 / std::numbers::pi;
                if (std::abs(angle - 90.0) > kMaxAngleDeviation)
                    continue;
                double m = (p[0]->module_size + p[1]->module_size + p[2]->module_size) / 3.0;
                if (std::min(l1, l2) / m < kMinLegModules || std::max(l1, l2) / m > kMaxLegModules)
                    continue;
                double leg_ratio = std::max(l1, l2) / std::min(l1, l2);
                if (leg_ratio > kMaxLegRatio)
                    continue;
                // y grows downwards, so top-right -> bottom-left is a positive cross product
                if (cross(v1, v2) < 0)
                    std::swap(i1, i2);
                Scored s;
                s.triple.finders = {*p[tl], *p[i1], *p[i2]};
                s.triple.module_size = m;
                s.triple.error = std::abs(angle - 90.0) / kMaxAngleDeviation + std::log(leg_ratio) / std::log(kMaxLegRatio) +
                                 (mmax / mmin - 1.0) / (kMaxModuleRatio - 1.0);
                s.ids = {ids[tl], ids[i1], ids[i2]};
                all.push_back(s);
            }
    std::stable_sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.triple.error < b.triple.error; });

    std::vector<bool> used(patterns.size(), false);
    std::vector<FinderTriple> out;
    for (const auto& s : all) {
        if (used[s.ids[0]] || used[s.ids[1]] || used[s.ids[2]])
            continue;
        for (auto id : s.ids)
            used[id] = true;
        out.push_back(s.triple);
    }
    return out;
}

} // namespace egoqr
