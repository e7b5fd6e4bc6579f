// SPDX-License-Identifier: Apache-2.0

#include "egoqr/grid_sampler.hpp"

#include "egoqr/error.hpp"

#include <algorithm>
#include <cmath>

namespace egoqr {

void check_quad(const std::array<PointF, 4>& quad)
{
    double scale = 0;
    for (const auto& p : quad)
        for (const auto& q : quad)
            scale = std::max(scale, distance(p, q));
    if (!(scale > 1e-9) || !std::isfinite(scale))
        throw GeometryError("degenerate quadrilateral: zero extent");
    for (int i = 0; i < 4; ++i) {
        PointF a = quad[i], b = quad[(i + 1) % 4], c = quad[(i + 2) % 4];
        if (std::abs(cross(b - a, c - a)) < 1e-9 * scale * scale)
            throw GeometryError("degenerate quadrilateral: collinear corners");
    }
}

Homography Homography::square_to_quad(const std::array<PointF, 4>& q)
{
    check_quad(q);
    Homography h;
    double dx3 = q[0].x - q[1].x + q[2].x - q[3].x;
    double dy3 = q[0].y - q[1].y + q[2].y - q[3].y;
    if (dx3 == 0.0 && dy3 == 0.0) {
        h._m = {q[1].x - q[0].x, q[2].x - q[1].x, q[0].x, q[1].y - q[0].y, q[2].y - q[1].y, q[0].y, 0, 0, 1};
        return h;
    }
    double dx1 = q[1].x - q[2].x, dx2 = q[3].x - q[2].x;
    double dy1 = q[1].y - q[2].y, dy2 = q[3].y - q[2].y;
    double denom = dx1 * dy2 - dx2 * dy1;
    if (denom == 0.0)
        throw GeometryError("degenerate quadrilateral");
    double a13 = (dx3 * dy2 - dx2 * dy3) / denom;
    double a23 = (dx1 * dy3 - dx3 * dy1) / denom;
    h._m = {q[1].x - q[0].x + a13 * q[1].x, q[3].x - q[0].x + a23 * q[3].x, q[0].x,
            q[1].y - q[0].y + a13 * q[1].y, q[3].y - q[0].y + a23 * q[3].y, q[0].y,
            a13,                            a23,                            1};
    return h;
}

Homography Homography::fit(std::span<const PointF> src, std::span<const PointF> dst)
{
    if (src.size() != dst.size() || src.size() < 4)
        throw GeometryError("homography fit needs at least four correspondences");
    // similarity moving the centroid to the origin with mean distance sqrt(2)
    auto normalizer = [](std::span<const PointF> pts) {
        PointF c{0, 0};
        for (auto p : pts)
            c = c + p;
        c = (1.0 / pts.size()) * c;
        double d = 0;
        for (auto p : pts)
            d += distance(p, c);
        d /= pts.size();
        if (!(d > 1e-12))
            throw GeometryError("homography fit: coincident points");
        double k = std::sqrt(2.0) / d;
        Homography t;
        t._m = {k, 0, -k * c.x, 0, k, -k * c.y, 0, 0, 1};
        return t;
    };
    const Homography ts = normalizer(src), td = normalizer(dst);

    std::array<std::array<double, 9>, 8> a{}; // normal equations, augmented
    for (std::size_t i = 0; i < src.size(); ++i) {
        PointF s = ts.map(src[i]), d = td.map(dst[i]);
        const double rows[2][9] = {{s.x, s.y, 1, 0, 0, 0, -s.x * d.x, -s.y * d.x, d.x},
                                   {0, 0, 0, s.x, s.y, 1, -s.x * d.y, -s.y * d.y, d.y}};
        for (const auto& r : rows)
            for (int j = 0; j < 8; ++j)
                for (int k = 0; k < 9; ++k)
                    a[j][k] += r[j] * r[k];
    }
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw GeometryError("homography fit: degenerate configuration");
        std::swap(a[col], a[pivot]);
        for (int r = 0; r < 8; ++r) {
            if (r == col)
                continue;
            double f = a[r][col] / a[col][col];
            for (int k = col; k < 9; ++k)
                a[r][k] -= f * a[col][k];
        }
    }
    Homography n;
    for (int j = 0; j < 8; ++j)
        n._m[j] = a[j][8] / a[j][j];
    n._m[8] = 1;
    return ts.then(n).then(td.inverse());
}

Homography Homography::from_quads(const std::array<PointF, 4>& src, const std::array<PointF, 4>& dst)
{
    return square_to_quad(src).inverse().then(square_to_quad(dst));
}

PointF Homography::map(PointF p) const
{
    double w = _m[6] * p.x + _m[7] * p.y + _m[8];
    return {(_m[0] * p.x + _m[1] * p.y + _m[2]) / w, (_m[3] * p.x + _m[4] * p.y + _m[5]) / w};
}

Homography Homography::inverse() const
{
    const auto& m = _m;
    std::array<double, 9> adj{m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
                              m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
                              m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3]};
    double det = m[0] * adj[0] + m[1] * adj[3] + m[2] * adj[6];
    if (det == 0.0 || !std::isfinite(det))
        throw GeometryError("singular homography");
    Homography h;
    for (int i = 0; i < 9; ++i)
        h._m[i] = adj[i] / det;
    return h;
}

Homography Homography::then(const Homography& next) const
{
    Homography h;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double s = 0;
            for (int k = 0; k < 3; ++k)
                s += next._m[r * 3 + k] * _m[k * 3 + c];
            h._m[r * 3 + c] = s;
        }
    return h;
}

Binarizer threshold_binarizer(int threshold)
{
    return [threshold](std::uint8_t v) { return v <= threshold; };
}

BitMatrix sample_grid(const GrayImage& img, const std::array<PointF, 4>& corners, int side, const Binarizer& binarizer)
{
    if (side < side_for_version(kMinVersion))
        throw GeometryError("grid side must be at least 21 modules");
    double s = side;
    auto h = Homography::from_quads({PointF{0, 0}, PointF{s, 0}, PointF{s, s}, PointF{0, s}}, corners);
    return sample_grid(img, h, side, binarizer);
}

BitMatrix sample_grid(const GrayImage& img, const Homography& module_to_image, int side, const Binarizer& binarizer)
{
    BitMatrix bits(side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            PointF p = module_to_image.map({x + 0.5, y + 0.5});
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                continue;
            int px = static_cast<int>(std::floor(p.x)), py = static_cast<int>(std::floor(p.y));
            if (px < 0 || py < 0 || px >= img.width() || py >= img.height())
                continue;
            bits.set(x, y, binarizer(img(px, py)));
        }
    return bits;
}

} // namespace egoqr
