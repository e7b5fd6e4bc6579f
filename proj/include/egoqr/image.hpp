// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace egoqr {

/// 8-bit single channel raster, row-major.
class GrayImage
{
public:
    GrayImage() = default;
    /// Throws GeometryError when either dimension is < 1.
    GrayImage(int width, int height, std::uint8_t fill = 0);
    /// Throws GeometryError when pixels.size() != width * height.
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const { return _width; }
    int height() const { return _height; }
    bool empty() const { return _pixels.empty(); }
    std::size_t size() const { return _pixels.size(); }

    std::uint8_t operator()(int x, int y) const { return _pixels[static_cast<std::size_t>(y) * _width + x]; }
    std::uint8_t& operator()(int x, int y) { return _pixels[static_cast<std::size_t>(y) * _width + x]; }

    /// Edge-replicating accessor.
    std::uint8_t clamped(int x, int y) const;

    std::span<const std::uint8_t> row(int y) const { return {_pixels.data() + static_cast<std::size_t>(y) * _width, static_cast<std::size_t>(_width)}; }
    std::span<std::uint8_t> row(int y) { return {_pixels.data() + static_cast<std::size_t>(y) * _width, static_cast<std::size_t>(_width)}; }

    std::span<const std::uint8_t> pixels() const { return _pixels; }
    std::span<std::uint8_t> pixels() { return _pixels; }

    bool operator==(const GrayImage&) const = default;

private:
    int _width = 0;
    int _height = 0;
    std::vector<std::uint8_t> _pixels;
};

struct PointF
{
    double x = 0;
    double y = 0;

    friend PointF operator+(PointF a, PointF b) { return {a.x + b.x, a.y + b.y}; }
    friend PointF operator-(PointF a, PointF b) { return {a.x - b.x, a.y - b.y}; }
    friend PointF operator*(double s, PointF p) { return {s * p.x, s * p.y}; }
    friend PointF operator*(PointF p, double s) { return {s * p.x, s * p.y}; }
    friend bool operator==(PointF, PointF) = default;
};

double distance(PointF a, PointF b);
double dot(PointF a, PointF b);
double cross(PointF a, PointF b);

/// Inclusive pixel box: both corners belong to the box.
struct BoundingBox
{
    int x_min = 0;
    int y_min = 0;
    int x_max = 0;
    int y_max = 0;

    int width() const { return x_max - x_min + 1; }
    int height() const { return y_max - y_min + 1; }
    long long area() const { return static_cast<long long>(width()) * height(); }
    PointF center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }
    bool contains(PointF p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
    bool valid() const { return x_min <= x_max && y_min <= y_max; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
    friend auto operator<=>(const BoundingBox&, const BoundingBox&) = default;
};

/// Smallest box containing all points, using floor/ceil on continuous coordinates.
BoundingBox bounding_box_of(std::span<const PointF> points);

/// Intersection over union of two inclusive boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

/// The box clamped to [0,w-1]x[0,h-1]; std::nullopt when nothing remains.
std::optional<BoundingBox> clamp_to(const BoundingBox& box, int width, int height);

/// Half-line with unit direction.
class Ray
{
public:
    /// Normalizes `direction`; throws GeometryError for a zero vector.
    Ray(PointF origin, PointF direction);

    PointF origin() const { return _origin; }
    PointF direction() const { return _direction; }
    PointF at(double t) const { return _origin + t * _direction; }

private:
    PointF _origin;
    PointF _direction;
};

/// Flat structuring element: a set of offsets around a centered anchor.
class StructuringElement
{
public:
    /// Full rectangle; width and height must be odd and positive.
    static StructuringElement rectangle(int width, int height);
    /// Arbitrary mask, row-major, width*height entries; the anchor is the center cell.
    StructuringElement(int width, int height, std::span<const bool> mask);

    int width() const { return _width; }
    int height() const { return _height; }
    std::span<const std::pair<int, int>> offsets() const { return _offsets; }
    StructuringElement reflected() const;

private:
    StructuringElement() = default;
    int _width = 0;
    int _height = 0;
    std::vector<std::pair<int, int>> _offsets;
};

// Binary PGM (P5, maxval 255).
GrayImage load_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> save_pgm(const GrayImage& img);
GrayImage read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const GrayImage& img);

/// P5 as is, or binary PPM (P6, maxval 255) reduced to BT.601 luma per pixel.
GrayImage load_pnm_as_gray(std::span<const std::uint8_t> bytes);
GrayImage read_pnm_as_gray_file(const std::string& path);

/// 255 - I(x, y) for every pixel.
GrayImage invert(const GrayImage& img);

/// Bilinear, corner aligned, rounding half away from zero.
GrayImage resize(const GrayImage& img, int new_width, int new_height);

/// Area averaging (each output pixel is the coverage weighted mean of the source pixels under it).
/// Intended for downscaling; rounding half up.
GrayImage resize_area(const GrayImage& img, int new_width, int new_height);

/// BT.601 luma, rounding half up.
std::uint8_t luma_bt601(std::uint8_t r, std::uint8_t g, std::uint8_t b);

struct MarginPolicy
{
    double fraction = 0.125;
    int min_pad = 8;
};

struct Crop
{
    GrayImage patch;
    BoundingBox source; ///< region of the input image the patch was copied from
};

/// Crops `box` grown by max(min_pad, round(fraction * longest side)) on each side, clamped to the image.
Crop crop_with_margin(const GrayImage& img, const BoundingBox& box, MarginPolicy margin = {});

/// Smallest t >= 0 with ray.at(t) inside the (closed, continuous) box, slab method.
std::optional<double> intersect_ray_box(const Ray& ray, const BoundingBox& box);

} // namespace egoqr
