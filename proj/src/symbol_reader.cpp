// SPDX-License-Identifier: Apache-2.0

#include "egoqr/symbol_reader.hpp"

#include "egoqr/error.hpp"
#include "egoqr/qr_symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace egoqr {

namespace {

bool dark_at(const GrayImage& img, int x, int y)
{
    return x >= 0 && y >= 0 && x < img.width() && y < img.height() && img(x, y) < 128;
}

bool near_module(int run, double m)
{
    return std::abs(run - m) <= std::max(0.75, 0.6 * m);
}

/// Length of the run of `dark` pixels starting at (x, y) and walking (dx, dy), capped at `cap`.
int run_length(const GrayImage& img, int x, int y, int dx, int dy, bool dark, int cap)
{
    int n = 0;
    while (n <= cap && x >= 0 && y >= 0 && x < img.width() && y < img.height() && dark_at(img, x, y) == dark) {
        ++n;
        x += dx;
        y += dy;
    }
    return n;
}

/// Checks the dark center / light ring / dark ring profile through (x, y) along (dx, dy) and
/// returns the continuous offset of the center run's middle.
std::optional<double> alignment_profile(const GrayImage& img, int x, int y, int dx, int dy, double m)
{
    if (!dark_at(img, x, y))
        return std::nullopt;
    const int cap = static_cast<int>(std::ceil(3 * m)) + 2;
    int back = run_length(img, x, y, -dx, -dy, true, cap);
    int fwd = run_length(img, x, y, dx, dy, true, cap);
    int center = back + fwd - 1;
    if (!near_module(center, m))
        return std::nullopt;
    int lb = run_length(img, x - back * dx, y - back * dy, -dx, -dy, false, cap);
    int lf = run_length(img, x + fwd * dx, y + fwd * dy, dx, dy, false, cap);
    if (!near_module(lb, m) || !near_module(lf, m))
        return std::nullopt;
    // the outer ring must be dark; it may merge with neighbouring dark modules
    if (!dark_at(img, x - (back + lb) * dx, y - (back + lb) * dy) || !dark_at(img, x + (fwd + lf) * dx, y + (fwd + lf) * dy))
        return std::nullopt;
    return ((fwd - 1) - (back - 1)) / 2.0;
}

bool dark_at(const GrayImage& img, PointF p)
{
    return dark_at(img, static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y)));
}

/// First dark-to-light change walking from `inside` to `outside` in half-pixel steps.
std::optional<PointF> edge_crossing(const GrayImage& img, PointF inside, PointF outside)
{
    if (!dark_at(img, inside))
        return std::nullopt;
    const int steps = std::max(2, static_cast<int>(std::ceil(2 * distance(inside, outside))));
    PointF prev = inside;
    for (int i = 1; i <= steps; ++i) {
        PointF p = inside + (static_cast<double>(i) / steps) * (outside - inside);
        if (!dark_at(img, p))
            return 0.5 * (prev + p);
        prev = p;
    }
    return std::nullopt;
}

/// Distance from `center` to the outer edge of a finder along `dir` (unit): dark, light, dark, then light.
std::optional<double> finder_reach(const GrayImage& img, PointF center, PointF dir, double cap)
{
    bool want_dark = false;
    int changes = 0;
    for (double t = 0.5; t <= cap; t += 0.5) {
        if (dark_at(img, center + t * dir) == want_dark) {
            if (++changes == 3)
                return t - 0.25;
            want_dark = !want_dark;
        }
    }
    return std::nullopt;
}

/// Module size measured across the three finders along the symbol axes; 0 when unavailable.
double axis_module_size(const GrayImage& img, const FinderTriple& triple)
{
    const auto& [tl, tr, bl] = triple.finders;
    const PointF axes[2] = {tr.center - tl.center, bl.center - tl.center};
    double sum = 0;
    int n = 0;
    for (const auto& f : triple.finders)
        for (PointF a : axes) {
            double len = std::hypot(a.x, a.y);
            if (len <= 0)
                continue;
            PointF d = (1.0 / len) * a;
            const double cap = 8.0 * triple.module_size;
            auto fwd = finder_reach(img, f.center, d, cap), back = finder_reach(img, f.center, -1.0 * d, cap);
            if (fwd && back) {
                sum += (*fwd + *back) / 7.0;
                ++n;
            }
        }
    return n >= 3 ? sum / n : 0.0;
}

struct Line
{
    PointF point;
    PointF dir;
};

/// Total least squares; one pass drops points farther than `tolerance` from the first fit.
std::optional<Line> fit_line(std::vector<PointF> pts, double tolerance)
{
    for (int pass = 0; pass < 2; ++pass) {
        if (pts.size() < 3)
            return std::nullopt;
        PointF c{0, 0};
        for (auto p : pts)
            c = c + p;
        c = (1.0 / pts.size()) * c;
        double sxx = 0, sxy = 0, syy = 0;
        for (auto p : pts) {
            sxx += (p.x - c.x) * (p.x - c.x);
            sxy += (p.x - c.x) * (p.y - c.y);
            syy += (p.y - c.y) * (p.y - c.y);
        }
        double a = 0.5 * std::atan2(2 * sxy, sxx - syy);
        Line line{c, {std::cos(a), std::sin(a)}};
        if (pass == 1)
            return line;
        std::erase_if(pts, [&](PointF p) { return std::abs(cross(line.dir, p - c)) > tolerance; });
    }
    return std::nullopt;
}

std::optional<PointF> intersect(const Line& a, const Line& b)
{
    double den = cross(a.dir, b.dir);
    if (std::abs(den) < 1e-6)
        return std::nullopt;
    return a.point + (cross(b.point - a.point, b.dir) / den) * a.dir;
}

/// Outer corners (TL, TR, BR, BL) of the finder whose top-left module is (fx, fy), from lines
/// fitted to its four outer edges; `h` only has to be accurate to half a module near the finder.
std::optional<std::array<PointF, 4>> finder_corners(const GrayImage& img, const Homography& h, double fx, double fy,
                                                    double module_size)
{
    std::array<Line, 4> edges; // top, right, bottom, left
    for (int e = 0; e < 4; ++e) {
        std::vector<PointF> pts;
        for (double t = 1.0; t <= 6.0; t += 0.5) {
            PointF on, out;
            switch (e) {
            case 0: on = {fx + t, fy}, out = {0, -1}; break;
            case 1: on = {fx + 7, fy + t}, out = {1, 0}; break;
            case 2: on = {fx + t, fy + 7}, out = {0, 1}; break;
            default: on = {fx, fy + t}, out = {-1, 0}; break;
            }
            if (auto p = edge_crossing(img, h.map(on - 0.5 * out), h.map(on + 1.5 * out)))
                pts.push_back(*p);
        }
        auto line = fit_line(std::move(pts), std::max(1.0, 0.3 * module_size));
        if (!line)
            return std::nullopt;
        edges[e] = *line;
    }
    auto tl = intersect(edges[0], edges[3]), tr = intersect(edges[0], edges[1]);
    auto br = intersect(edges[2], edges[1]), bl = intersect(edges[2], edges[3]);
    if (!tl || !tr || !br || !bl)
        return std::nullopt;
    return std::array<PointF, 4>{*tl, *tr, *br, *bl};
}

/// Homography fitted to the twelve outer finder corners (plus the alignment center when found).
std::optional<Homography> refine_geometry(const GrayImage& img, const Homography& initial, int side,
                                          double module_size, const FinderTriple& triple, bool& used_alignment)
{
    const double s = side;
    const PointF origins[3] = {{0, 0}, {s - 7, 0}, {0, s - 7}};
    std::vector<PointF> src, dst;
    for (const auto& o : origins) {
        auto corners = finder_corners(img, initial, o.x, o.y, module_size);
        if (!corners)
            return std::nullopt;
        const PointF module[4] = {o, o + PointF{7, 0}, o + PointF{7, 7}, o + PointF{0, 7}};
        for (int i = 0; i < 4; ++i) {
            src.push_back(module[i]);
            dst.push_back((*corners)[i]);
        }
    }
    Homography h;
    try {
        h = Homography::fit(src, dst);
    } catch (const GeometryError&) {
        return std::nullopt;
    }
    // the refined transform must still land on the detected finder centers
    const PointF centers[3] = {{3.5, 3.5}, {s - 3.5, 3.5}, {3.5, s - 3.5}};
    for (int i = 0; i < 3; ++i)
        if (distance(h.map(centers[i]), triple.finders[i].center) > std::max(1.5, module_size))
            return std::nullopt;

    used_alignment = false;
    if (side >= side_for_version(2)) {
        if (auto ap = find_alignment_pattern(img, h.map({s - 6.5, s - 6.5}), module_size, std::max(2.0 * module_size, 3.0))) {
            for (int k = 0; k < 4; ++k) {
                src.push_back({s - 6.5, s - 6.5});
                dst.push_back(*ap);
            }
            try {
                h = Homography::fit(src, dst);
                used_alignment = true;
            } catch (const GeometryError&) {
            }
        }
    }
    return h;
}

} // namespace

std::optional<PointF> find_alignment_pattern(const GrayImage& binary, PointF predicted, double module_size,
                                             double radius)
{
    const int x0 = std::max(0, static_cast<int>(std::floor(predicted.x - radius)));
    const int x1 = std::min(binary.width() - 1, static_cast<int>(std::ceil(predicted.x + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(predicted.y - radius)));
    const int y1 = std::min(binary.height() - 1, static_cast<int>(std::ceil(predicted.y + radius)));

    std::optional<PointF> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            // only test the first pixel of each dark run on the row
            if (!dark_at(binary, x, y) || (x > x0 && dark_at(binary, x - 1, y)))
                continue;
            auto h = alignment_profile(binary, x, y, 1, 0, module_size);
            if (!h)
                continue;
            int cx = x + static_cast<int>(std::lround(*h));
            auto v = alignment_profile(binary, cx, y, 0, 1, module_size);
            if (!v)
                continue;
            double cy = y + 0.5 + *v;
            auto h2 = alignment_profile(binary, cx, static_cast<int>(cy), 1, 0, module_size);
            if (!h2)
                continue;
            PointF c{cx + 0.5 + *h2, cy};
            double d = distance(c, predicted);
            if (d <= radius && d < best_d) {
                best_d = d;
                best = c;
            }
        }
    return best;
}

std::vector<SymbolGeometry> candidate_geometries(const GrayImage& binary, const FinderTriple& triple)
{
    const auto& [tl, tr, bl] = triple.finders;
    const double legs = (distance(tl.center, tr.center) + distance(tl.center, bl.center)) / 2.0;
    const double axis_m = axis_module_size(binary, triple);
    const double estimate = legs / (axis_m > 0 ? axis_m : triple.module_size) + 7.0;
    const int v0 = std::clamp(static_cast<int>(std::lround((estimate - 17.0) / 4.0)), kMinVersion, kMaxVersion);

    std::vector<SymbolGeometry> out;
    for (int v : {v0, v0 - 1, v0 + 1}) {
        if (v < kMinVersion || v > kMaxVersion)
            continue;
        const int side = side_for_version(v);
        const double s = side;
        PointF u = (1.0 / (s - 7)) * (tr.center - tl.center);
        PointF w = (1.0 / (s - 7)) * (bl.center - tl.center);
        std::array<PointF, 4> src_parallelogram{PointF{3.5, 3.5}, {s - 3.5, 3.5}, {s - 3.5, s - 3.5}, {3.5, s - 3.5}};
        std::array<PointF, 4> dst_parallelogram{tl.center, tr.center, tr.center + (bl.center - tl.center), bl.center};
        try {
            auto initial = Homography::from_quads(src_parallelogram, dst_parallelogram);
            const double m = (std::hypot(u.x, u.y) + std::hypot(w.x, w.y)) / 2.0;
            bool aligned = false;
            if (auto refined = refine_geometry(binary, initial, side, m, triple, aligned))
                out.push_back({side, *refined, aligned});
        } catch (const GeometryError&) {
        }
        if (v >= 2) {
            PointF predicted = tl.center + (s - 10) * (u + w);
            double m = std::hypot(u.x, u.y) * 0.5 + std::hypot(w.x, w.y) * 0.5;
            if (auto ap = find_alignment_pattern(binary, predicted, m, std::max(4.0 * m, 3.0))) {
                std::array<PointF, 4> src{PointF{3.5, 3.5}, {s - 3.5, 3.5}, {s - 6.5, s - 6.5}, {3.5, s - 3.5}};
                std::array<PointF, 4> dst{tl.center, tr.center, *ap, bl.center};
                try {
                    out.push_back({side, Homography::from_quads(src, dst), true});
                } catch (const GeometryError&) {
                }
            }
        }
        try {
            out.push_back({side, Homography::from_quads(src_parallelogram, dst_parallelogram), false});
        } catch (const GeometryError&) {
        }
    }
    return out;
}

std::optional<DecodedPayload> read_symbol(const GrayImage& binary)
{
    if (binary.empty())
        return std::nullopt;
    const auto dark = threshold_binarizer(127);
    for (const auto& triple : match_triples(find_finder_patterns(binary)))
        for (const auto& g : candidate_geometries(binary, triple)) {
            try {
                return decode_matrix(sample_grid(binary, g.module_to_image, g.side, dark));
            } catch (const Error&) {
            }
        }
    return std::nullopt;
}

} // namespace egoqr
