// SPDX-License-Identifier: Apache-2.0

#include "egoqr/detector.hpp"

#include "egoqr/enhance.hpp"
#include "egoqr/qr_symbol.hpp"

#include <algorithm>
#include <cmath>

namespace egoqr {

namespace {

constexpr double kOrphanScore = 0.3;
constexpr double kTripleScore = 0.9;
constexpr double kTextureScore = 0.2;

int snap_side(double modules)
{
    int v = static_cast<int>(std::lround((modules - 17.0) / 4.0));
    return side_for_version(std::clamp(v, kMinVersion, kMaxVersion));
}

BoundingBox box_around(PointF c, double half)
{
    return {static_cast<int>(std::floor(c.x - half)), static_cast<int>(std::floor(c.y - half)),
            static_cast<int>(std::ceil(c.x + half)) - 1, static_cast<int>(std::ceil(c.y + half)) - 1};
}

/// Folds `extra` into `base`, treating centers closer than two module sizes as the same pattern.
void merge_patterns(std::vector<FinderPattern>& base, const std::vector<FinderPattern>& extra)
{
    for (const auto& e : extra) {
        auto it = std::find_if(base.begin(), base.end(), [&](const FinderPattern& f) {
            return distance(f.center, e.center) < 2.0 * std::max(f.module_size, e.module_size);
        });
        if (it == base.end()) {
            base.push_back(e);
            continue;
        }
        double w = it->hits, we = e.hits;
        it->center = (1.0 / (w + we)) * (w * it->center + we * e.center);
        it->module_size = (w * it->module_size + we * e.module_size) / (w + we);
        it->hits += e.hits;
    }
}

std::vector<FinderPattern> search_thumbnail(const GrayImage& thumb, bool adaptive)
{
    const int global_t = otsu_threshold(thumb).threshold;
    auto found = find_finder_patterns(binarize(thumb, global_t));
    if (!adaptive)
        return found;
    merge_patterns(found, find_finder_patterns(binarize_local_mean(thumb, 8, global_t)));

    // small symbols: enlarge so mixed edge pixels split near the true module boundary
    const int w2 = 2 * thumb.width(), h2 = 2 * thumb.height();
    auto big = find_finder_patterns(binarize_local_mean(resize(thumb, w2, h2), 16, global_t));
    const double fx = thumb.width() > 1 ? (thumb.width() - 1.0) / (w2 - 1.0) : 0.5;
    const double fy = thumb.height() > 1 ? (thumb.height() - 1.0) / (h2 - 1.0) : 0.5;
    for (auto& f : big) {
        f.center = {f.center.x * fx, f.center.y * fy};
        f.module_size *= (fx + fy) / 2.0;
    }
    merge_patterns(found, big);
    return found;
}

} // namespace

BoundingBox to_full_resolution(const BoundingBox& b, double scale_x, double scale_y, int width, int height)
{
    BoundingBox full{static_cast<int>(std::floor(b.x_min * scale_x)), static_cast<int>(std::floor(b.y_min * scale_y)),
                     static_cast<int>(std::ceil((b.x_max + 1) * scale_x)) - 1,
                     static_cast<int>(std::ceil((b.y_max + 1) * scale_y)) - 1};
    return clamp_to(full, width, height).value_or(full);
}

std::vector<BoundingBox> find_texture_regions(const GrayImage& thumb)
{
    constexpr int kEdgeStep = 48;   // intensity jump between neighbours that counts as an edge
    constexpr int kRadius = 3;      // density window (2r+1)^2
    constexpr double kDensity = 0.3;
    constexpr int kMinSide = 12;
    const int w = thumb.width(), h = thumb.height();
    if (w < 2 || h < 2)
        return {};

    std::vector<int> edge_sum((w + 1) * static_cast<std::size_t>(h + 1), 0);
    auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * (w + 1) + x; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int v = thumb(x, y);
            bool edge = (x + 1 < w && std::abs(thumb(x + 1, y) - v) >= kEdgeStep) ||
                        (y + 1 < h && std::abs(thumb(x, y + 1) - v) >= kEdgeStep);
            edge_sum[at(x + 1, y + 1)] = edge + edge_sum[at(x, y + 1)] + edge_sum[at(x + 1, y)] - edge_sum[at(x, y)];
        }
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int x0 = std::max(0, x - kRadius), y0 = std::max(0, y - kRadius);
            int x1 = std::min(w, x + kRadius + 1), y1 = std::min(h, y + kRadius + 1);
            int n = edge_sum[at(x1, y1)] - edge_sum[at(x0, y1)] - edge_sum[at(x1, y0)] + edge_sum[at(x0, y0)];
            mask[static_cast<std::size_t>(y) * w + x] = n >= kDensity * (x1 - x0) * (y1 - y0);
        }

    std::vector<BoundingBox> out;
    std::vector<int> stack;
    for (int start = 0; start < w * h; ++start) {
        if (mask[start] != 1)
            continue;
        BoundingBox box{start % w, start / w, start % w, start / w};
        long long count = 0;
        mask[start] = 2;
        stack.push_back(start);
        while (!stack.empty()) {
            int p = stack.back();
            stack.pop_back();
            int px = p % w, py = p / w;
            ++count;
            box = {std::min(box.x_min, px), std::min(box.y_min, py), std::max(box.x_max, px), std::max(box.y_max, py)};
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int nx = px + dx, ny = py + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h)
                        continue;
                    int q = ny * w + nx;
                    if (mask[q] == 1) {
                        mask[q] = 2;
                        stack.push_back(q);
                    }
                }
        }
        const int bw = box.width(), bh = box.height();
        // a square symbol fills at least half of its bounding box at any rotation
        if (std::min(bw, bh) >= kMinSide && std::max(bw, bh) <= 1.8 * std::min(bw, bh) &&
            count >= 0.45 * box.area())
            out.push_back(box);
    }
    return out;
}

GrayImage binarize_local_mean(const GrayImage& img, int radius, int fallback_threshold, double min_stddev)
{
    const int w = img.width(), h = img.height();
    GrayImage out(w, h);
    // summed-area tables of I and I^2, one row/column of padding
    std::vector<long long> s((w + 1) * static_cast<std::size_t>(h + 1)), q(s.size());
    auto at = [w](int x, int y) { return static_cast<std::size_t>(y) * (w + 1) + x; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            long long v = img(x, y);
            s[at(x + 1, y + 1)] = v + s[at(x, y + 1)] + s[at(x + 1, y)] - s[at(x, y)];
            q[at(x + 1, y + 1)] = v * v + q[at(x, y + 1)] + q[at(x + 1, y)] - q[at(x, y)];
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int x0 = std::max(0, x - radius), y0 = std::max(0, y - radius);
            int x1 = std::min(w, x + radius + 1), y1 = std::min(h, y + radius + 1);
            double n = static_cast<double>(x1 - x0) * (y1 - y0);
            double sum = s[at(x1, y1)] - s[at(x0, y1)] - s[at(x1, y0)] + s[at(x0, y0)];
            double sq = q[at(x1, y1)] - q[at(x0, y1)] - q[at(x1, y0)] + q[at(x0, y0)];
            double mean = sum / n;
            double var = sq / n - mean * mean;
            bool dark = var < min_stddev * min_stddev ? img(x, y) <= fallback_threshold : img(x, y) <= mean;
            out(x, y) = dark ? 0 : 255;
        }
    return out;
}

Thumbnail make_thumbnail(const GrayImage& img, int max_width, int max_height)
{
    if (img.width() <= max_width && img.height() <= max_height)
        return {img, 1.0, 1.0};
    double s = std::max(static_cast<double>(img.width()) / max_width, static_cast<double>(img.height()) / max_height);
    int w = std::clamp(static_cast<int>(std::lround(img.width() / s)), 1, max_width);
    int h = std::clamp(static_cast<int>(std::lround(img.height() / s)), 1, max_height);
    return {resize_area(img, w, h), static_cast<double>(img.width()) / w, static_cast<double>(img.height()) / h};
}

std::vector<Detection> group_finders_to_boxes(const std::vector<FinderPattern>& patterns, int width, int height)
{
    std::vector<Detection> out;
    std::vector<bool> used(patterns.size(), false);

    for (const auto& t : match_triples(patterns)) {
        const auto& [tl, tr, bl] = t.finders;
        double legs = (distance(tl.center, tr.center) + distance(tl.center, bl.center)) / 2.0;
        int side = snap_side(legs / t.module_size + 7.0);
        PointF u = (1.0 / (side - 7)) * (tr.center - tl.center);
        PointF v = (1.0 / (side - 7)) * (bl.center - tl.center);
        PointF origin = tl.center - 3.5 * (u + v);
        std::array<PointF, 4> corners{origin - u - v, origin + (side + 1.0) * u - v,
                                      origin + (side + 1.0) * (u + v), origin - u + (side + 1.0) * v};
        auto box = clamp_to(bounding_box_of(corners), width, height);
        if (!box)
            continue;
        Detection d;
        d.box = *box;
        d.score = kTripleScore + (1.0 - kTripleScore) * std::max(0.0, 1.0 - t.error / 3.0);
        d.finder_centers = {tl.center, tr.center, bl.center};
        out.push_back(d);
        for (std::size_t i = 0; i < patterns.size(); ++i)
            for (const auto& f : t.finders)
                if (patterns[i].center == f.center)
                    used[i] = true;
    }
    const std::size_t n_triples = out.size();

    // leftover evidence; a finder inside an accepted symbol is most likely a data-area lookalike
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        bool inside = false;
        for (std::size_t k = 0; k < n_triples; ++k)
            inside |= out[k].box.contains(patterns[i].center);
        if (!used[i] && !inside && patterns[i].hits >= 2)
            rest.push_back(i);
    }

    struct Pair
    {
        std::size_t a, b;
        double d;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < rest.size(); ++i)
        for (std::size_t j = i + 1; j < rest.size(); ++j) {
            const auto& a = patterns[rest[i]];
            const auto& b = patterns[rest[j]];
            double m = (a.module_size + b.module_size) / 2.0;
            if (std::max(a.module_size, b.module_size) > 1.6 * std::min(a.module_size, b.module_size))
                continue;
            double d = distance(a.center, b.center);
            if (d / m < 9.0 || d / m > 65.0 * 1.5)
                continue;
            pairs.push_back({rest[i], rest[j], d});
        }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    for (const auto& p : pairs) {
        if (used[p.a] || used[p.b])
            continue;
        used[p.a] = used[p.b] = true;
        const auto& a = patterns[p.a];
        const auto& b = patterns[p.b];
        double pad = 4.5 * (a.module_size + b.module_size) / 2.0;
        std::array<PointF, 2> pts{a.center, b.center};
        auto box = bounding_box_of(pts);
        BoundingBox grown{static_cast<int>(std::floor(box.x_min - pad)), static_cast<int>(std::floor(box.y_min - pad)),
                          static_cast<int>(std::ceil(box.x_max + pad)), static_cast<int>(std::ceil(box.y_max + pad))};
        if (auto c = clamp_to(grown, width, height))
            out.push_back({*c, kOrphanScore, {a.center, b.center}});
    }
    for (auto i : rest) {
        if (used[i])
            continue;
        const auto& f = patterns[i];
        // the smallest symbol around a lone finder reaches 17.5 modules from its center in any direction
        if (auto c = clamp_to(box_around(f.center, 18.5 * f.module_size), width, height))
            out.push_back({*c, kOrphanScore, {f.center}});
    }
    return out;
}

std::vector<Detection> detect(const GrayImage& img, const DetectorConfig& config)
{
    if (img.empty())
        return {};
    auto thumb = make_thumbnail(img, config.thumb_max_width, config.thumb_max_height);
    auto dets = group_finders_to_boxes(search_thumbnail(thumb.image, config.adaptive_passes), thumb.image.width(),
                                       thumb.image.height());
    if (config.texture_fallback) {
        const std::size_t n_finder = dets.size();
        for (const auto& box : find_texture_regions(thumb.image)) {
            bool explained = false;
            for (std::size_t i = 0; i < n_finder; ++i)
                if (dets[i].score >= kTripleScore)
                    explained |= dets[i].box.contains(box.center()) || iou(dets[i].box, box) >= 0.3;
            if (!explained)
                dets.push_back({box, kTextureScore, {}});
        }
    }

    for (auto& d : dets) {
        d.box = to_full_resolution(d.box, thumb.scale_x, thumb.scale_y, img.width(), img.height());
        for (auto& c : d.finder_centers)
            c = {c.x * thumb.scale_x, c.y * thumb.scale_y};
    }
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score)
            return a.score > b.score;
        if (a.box.area() != b.box.area())
            return a.box.area() > b.box.area();
        return a.box < b.box;
    });
    return dets;
}

} // namespace egoqr
