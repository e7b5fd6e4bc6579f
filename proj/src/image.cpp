// SPDX-License-Identifier: Apache-2.0

#include "egoqr/image.hpp"

#include "egoqr/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <string>

namespace egoqr {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
{
    if (width < 1 || height < 1)
        throw GeometryError("image dimensions must be positive");
    _width = width;
    _height = height;
    _pixels.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
{
    if (width < 1 || height < 1)
        throw GeometryError("image dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw GeometryError("pixel buffer does not match image dimensions");
    _width = width;
    _height = height;
    _pixels = std::move(pixels);
}

std::uint8_t GrayImage::clamped(int x, int y) const
{
    return (*this)(std::clamp(x, 0, _width - 1), std::clamp(y, 0, _height - 1));
}

double distance(PointF a, PointF b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double dot(PointF a, PointF b)
{
    return a.x * b.x + a.y * b.y;
}

double cross(PointF a, PointF b)
{
    return a.x * b.y - a.y * b.x;
}

BoundingBox bounding_box_of(std::span<const PointF> points)
{
    if (points.empty())
        throw GeometryError("bounding box of an empty point set");
    double x0 = points[0].x, x1 = points[0].x, y0 = points[0].y, y1 = points[0].y;
    for (auto p : points) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    // continuous [x0, x1) covers pixels floor(x0) .. ceil(x1) - 1
    BoundingBox box{static_cast<int>(std::floor(x0)), static_cast<int>(std::floor(y0)),
                    static_cast<int>(std::ceil(x1)) - 1, static_cast<int>(std::ceil(y1)) - 1};
    box.x_max = std::max(box.x_max, box.x_min);
    box.y_max = std::max(box.y_max, box.y_min);
    return box;
}

double iou(const BoundingBox& a, const BoundingBox& b)
{
    int ix0 = std::max(a.x_min, b.x_min), iy0 = std::max(a.y_min, b.y_min);
    int ix1 = std::min(a.x_max, b.x_max), iy1 = std::min(a.y_max, b.y_max);
    if (ix0 > ix1 || iy0 > iy1)
        return 0.0;
    double inter = static_cast<double>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
    return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

std::optional<BoundingBox> clamp_to(const BoundingBox& box, int width, int height)
{
    BoundingBox c{std::max(box.x_min, 0), std::max(box.y_min, 0), std::min(box.x_max, width - 1),
                  std::min(box.y_max, height - 1)};
    if (!c.valid())
        return std::nullopt;
    return c;
}

Ray::Ray(PointF origin, PointF direction) : _origin(origin)
{
    double n = std::hypot(direction.x, direction.y);
    if (!(n > 0) || !std::isfinite(n))
        throw GeometryError("ray direction must be a non-zero finite vector");
    _direction = {direction.x / n, direction.y / n};
}

StructuringElement StructuringElement::rectangle(int width, int height)
{
    if (width < 1 || height < 1)
        throw GeometryError("structuring element sides must be odd and positive");
    auto n = static_cast<std::size_t>(width) * height;
    auto mask = std::make_unique<bool[]>(n);
    std::fill_n(mask.get(), n, true);
    return StructuringElement(width, height, std::span<const bool>(mask.get(), n));
}

StructuringElement::StructuringElement(int width, int height, std::span<const bool> mask)
{
    if (width < 1 || height < 1 || width % 2 == 0 || height % 2 == 0)
        throw GeometryError("structuring element sides must be odd and positive");
    if (mask.size() != static_cast<std::size_t>(width) * height)
        throw GeometryError("structuring element mask size mismatch");
    _width = width;
    _height = height;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            if (mask[static_cast<std::size_t>(y) * width + x])
                _offsets.emplace_back(x - width / 2, y - height / 2);
    if (_offsets.empty())
        throw GeometryError("structuring element has no members");
}

StructuringElement StructuringElement::reflected() const
{
    StructuringElement r;
    r._width = _width;
    r._height = _height;
    for (auto [dx, dy] : _offsets)
        r._offsets.emplace_back(-dx, -dy);
    std::sort(r._offsets.begin(), r._offsets.end(),
              [](auto a, auto b) { return std::pair(a.second, a.first) < std::pair(b.second, b.first); });
    return r;
}

namespace {

class HeaderReader
{
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : _bytes(bytes) {}

    static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

    void skip_space_and_comments()
    {
        while (_pos < _bytes.size()) {
            if (is_space(_bytes[_pos])) {
                ++_pos;
            } else if (_bytes[_pos] == '#') {
                while (_pos < _bytes.size() && _bytes[_pos] != '\n')
                    ++_pos;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* what)
    {
        skip_space_and_comments();
        long v = 0;
        std::size_t start = _pos;
        while (_pos < _bytes.size() && _bytes[_pos] >= '0' && _bytes[_pos] <= '9') {
            v = v * 10 + (_bytes[_pos] - '0');
            if (v > std::numeric_limits<int>::max())
                throw FormatError(std::string("PGM ") + what + " out of range");
            ++_pos;
        }
        if (_pos == start)
            throw FormatError(std::string("PGM header: missing ") + what);
        return v;
    }

    std::size_t pos() const { return _pos; }
    void advance() { ++_pos; }
    bool at_end() const { return _pos >= _bytes.size(); }
    std::uint8_t peek() const { return _bytes[_pos]; }

private:
    std::span<const std::uint8_t> _bytes;
    std::size_t _pos = 0;
};

std::vector<std::uint8_t> read_all(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

namespace {

struct PnmRaster
{
    int width = 0;
    int height = 0;
    std::span<const std::uint8_t> samples;
};

/// Header and payload of a binary PNM with `channels` samples per pixel (1 for P5, 3 for P6).
PnmRaster parse_pnm(std::span<const std::uint8_t> bytes, char magic, int channels)
{
    HeaderReader hdr(bytes.subspan(2));
    long width = hdr.read_uint("width");
    long height = hdr.read_uint("height");
    long maxval = hdr.read_uint("maxval");
    if (width < 1 || height < 1)
        throw FormatError(std::string("P") + magic + " dimensions must be positive");
    if (maxval != 255)
        throw FormatError(std::string("P") + magic + " maxval must be 255, got " + std::to_string(maxval));
    if (hdr.at_end() || !HeaderReader::is_space(hdr.peek()))
        throw FormatError(std::string("P") + magic + " header must end with a single whitespace byte");
    hdr.advance();

    std::size_t offset = 2 + hdr.pos();
    std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
    if (bytes.size() - offset < need)
        throw FormatError(std::string("P") + magic + " payload truncated");
    return {static_cast<int>(width), static_cast<int>(height), bytes.subspan(offset, need)};
}

} // namespace

GrayImage load_pgm(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw FormatError("not a PNM file");
    if (bytes[1] != '5')
        throw FormatError(std::string("unsupported PNM variant P") + static_cast<char>(bytes[1]) + ", expected binary PGM (P5)");
    auto r = parse_pnm(bytes, '5', 1);
    return GrayImage(r.width, r.height, std::vector<std::uint8_t>(r.samples.begin(), r.samples.end()));
}

GrayImage load_pnm_as_gray(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
        auto r = parse_pnm(bytes, '6', 3);
        GrayImage img(r.width, r.height);
        auto px = img.pixels();
        for (std::size_t i = 0; i < px.size(); ++i)
            px[i] = luma_bt601(r.samples[3 * i], r.samples[3 * i + 1], r.samples[3 * i + 2]);
        return img;
    }
    return load_pgm(bytes);
}

std::vector<std::uint8_t> save_pgm(const GrayImage& img)
{
    std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

GrayImage read_pgm_file(const std::string& path)
{
    return load_pgm(read_all(path));
}

GrayImage read_pnm_as_gray_file(const std::string& path)
{
    return load_pnm_as_gray(read_all(path));
}

void write_pgm_file(const std::string& path, const GrayImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path);
    auto bytes = save_pgm(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed: " + path);
}

GrayImage invert(const GrayImage& img)
{
    GrayImage out = img;
    for (auto& p : out.pixels())
        p = static_cast<std::uint8_t>(255 - p);
    return out;
}

GrayImage resize(const GrayImage& img, int new_width, int new_height)
{
    if (new_width < 1 || new_height < 1)
        throw GeometryError("resize target dimensions must be positive");
    if (img.empty())
        throw GeometryError("resize of an empty image");

    // source coordinate of output sample i is i0 + r / den, kept exact so ties round half up reliably
    struct Tap
    {
        int i0;
        long long r;
    };
    auto source_taps = [](int n_out, int n_in, long long& den) {
        std::vector<Tap> taps(n_out);
        den = n_out == 1 ? 2 : n_out - 1;
        for (int i = 0; i < n_out; ++i) {
            long long num = n_out == 1 ? n_in - 1 : static_cast<long long>(i) * (n_in - 1);
            taps[i] = {static_cast<int>(num / den), num % den};
        }
        return taps;
    };
    long long dx = 0, dy = 0;
    auto xs = source_taps(new_width, img.width(), dx);
    auto ys = source_taps(new_height, img.height(), dy);
    const long long den = dx * dy;

    GrayImage out(new_width, new_height);
    for (int y = 0; y < new_height; ++y) {
        auto [y0, ry] = ys[y];
        int y1 = std::min(y0 + 1, img.height() - 1);
        for (int x = 0; x < new_width; ++x) {
            auto [x0, rx] = xs[x];
            int x1 = std::min(x0 + 1, img.width() - 1);
            long long v = (dx - rx) * (dy - ry) * img(x0, y0) + rx * (dy - ry) * img(x1, y0) +
                          (dx - rx) * ry * img(x0, y1) + rx * ry * img(x1, y1);
            out(x, y) = static_cast<std::uint8_t>((2 * v + den) / (2 * den));
        }
    }
    return out;
}

GrayImage resize_area(const GrayImage& img, int new_width, int new_height)
{
    if (new_width < 1 || new_height < 1)
        throw GeometryError("resize target dimensions must be positive");
    if (img.empty())
        throw GeometryError("resize of an empty image");

    // coverage of source cells [i, i+1) by output cell [o * s, (o + 1) * s), s = in / out
    struct Span
    {
        int first;
        std::vector<double> weights;
    };
    auto spans = [](int n_out, int n_in) {
        std::vector<Span> out(n_out);
        const double s = static_cast<double>(n_in) / n_out;
        for (int o = 0; o < n_out; ++o) {
            double a = o * s, b = (o + 1) * s;
            int first = static_cast<int>(std::floor(a));
            int last = std::min(n_in - 1, static_cast<int>(std::ceil(b)) - 1);
            out[o].first = first;
            for (int i = first; i <= last; ++i)
                out[o].weights.push_back(std::min<double>(b, i + 1) - std::max<double>(a, i));
        }
        return out;
    };
    auto xs = spans(new_width, img.width());
    auto ys = spans(new_height, img.height());

    GrayImage out(new_width, new_height);
    for (int y = 0; y < new_height; ++y)
        for (int x = 0; x < new_width; ++x) {
            double acc = 0, wsum = 0;
            for (std::size_t j = 0; j < ys[y].weights.size(); ++j)
                for (std::size_t i = 0; i < xs[x].weights.size(); ++i) {
                    double w = ys[y].weights[j] * xs[x].weights[i];
                    acc += w * img(xs[x].first + static_cast<int>(i), ys[y].first + static_cast<int>(j));
                    wsum += w;
                }
            out(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(acc / wsum + 0.5 + 1e-9), 0.0, 255.0));
        }
    return out;
}

std::uint8_t luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b)
{
    return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

Crop crop_with_margin(const GrayImage& img, const BoundingBox& box, MarginPolicy margin)
{
    if (!box.valid())
        throw GeometryError("invalid bounding box");
    if (!clamp_to(box, img.width(), img.height()))
        throw GeometryError("box lies outside the image");

    int side = std::max(box.width(), box.height());
    int pad = std::max(margin.min_pad, static_cast<int>(std::floor(margin.fraction * side + 0.5)));
    BoundingBox grown{box.x_min - pad, box.y_min - pad, box.x_max + pad, box.y_max + pad};
    BoundingBox src = *clamp_to(grown, img.width(), img.height());

    GrayImage patch(src.width(), src.height());
    for (int y = 0; y < src.height(); ++y) {
        auto in = img.row(src.y_min + y).subspan(src.x_min, src.width());
        std::copy(in.begin(), in.end(), patch.row(y).begin());
    }
    return {std::move(patch), src};
}

std::optional<double> intersect_ray_box(const Ray& ray, const BoundingBox& box)
{
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    const double o[2] = {ray.origin().x, ray.origin().y};
    const double d[2] = {ray.direction().x, ray.direction().y};
    const double lo[2] = {static_cast<double>(box.x_min), static_cast<double>(box.y_min)};
    const double hi[2] = {static_cast<double>(box.x_max), static_cast<double>(box.y_max)};
    for (int a = 0; a < 2; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] > hi[a])
                return std::nullopt;
            continue;
        }
        double t0 = (lo[a] - o[a]) / d[a];
        double t1 = (hi[a] - o[a]) / d[a];
        if (t0 > t1)
            std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
    }
    double t = std::max(t_enter, 0.0);
    if (t_exit < t)
        return std::nullopt;
    return t;
}

} // namespace egoqr
