/**
 * @file types.hpp
 * @brief Core value types shared across the library: 2D vectors, binary
 *        masks, contours, grayscale images and mask-restricted scalar fields.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace unwrap {

/// Sentinel magnitude standing in for +/- infinity in curvature reference
/// images, chosen large enough that sup/inf identities hold in doubles.
inline constexpr double kCurvatureSentinel = 1e12;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    Vec2 operator/(double k) const { return {x / k, y / k}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }

    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    /// Rotation by +90 degrees: (x, y) -> (-y, x).
    Vec2 rot90() const { return {-y, x}; }
};

inline Vec2 operator*(double k, const Vec2& v) { return v * k; }

/// Boolean pixel grid. true = body (foreground), false = background.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false)
        : width_(width), height_(height),
          cells_(static_cast<size_t>(width) * height, fill ? 1 : 0) {}

    int width() const { return width_; }
    int height() const { return height_; }

    /// Out-of-range coordinates read as background.
    bool at(int x, int y) const {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
        return cells_[static_cast<size_t>(y) * width_ + x] != 0;
    }
    void set(int x, int y, bool v) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        cells_[static_cast<size_t>(y) * width_ + x] = v ? 1 : 0;
    }

    size_t count() const {
        size_t n = 0;
        for (uint8_t c : cells_) n += c;
        return n;
    }

    bool operator==(const BinaryMask& o) const {
        return width_ == o.width_ && height_ == o.height_ && cells_ == o.cells_;
    }

    const std::vector<uint8_t>& cells() const { return cells_; }
    std::vector<uint8_t>& cells() { return cells_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> cells_;
};

/// 8-bit grayscale image.
struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    Image8() = default;
    Image8(int w, int h, uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

    uint8_t at(int x, int y) const {
        return pixels[static_cast<size_t>(y) * width + x];
    }
    void set(int x, int y, uint8_t v) {
        pixels[static_cast<size_t>(y) * width + x] = v;
    }
};

/// Ordered chain of boundary points with cumulative arc length.
struct Contour {
    std::vector<Vec2> points;
    std::vector<double> cumulative_length;  ///< arc length at each point, [0] = 0
    bool closed = true;

    size_t size() const { return points.size(); }

    /// Total length including the closing edge for closed contours.
    double total_length() const {
        if (points.size() < 2) return 0.0;
        double len = cumulative_length.back();
        if (closed) len += (points.back() - points.front()).norm();
        return len;
    }
};

enum class FieldUnits { Pixels, Log, Ratio };

/// Real-valued function on the pixels of a body mask. Exterior cells hold
/// NaN and must never be read as values.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int width, int height, FieldUnits units = FieldUnits::Pixels)
        : width_(width), height_(height), units_(units),
          values_(static_cast<size_t>(width) * height,
                  std::numeric_limits<double>::quiet_NaN()) {}

    int width() const { return width_; }
    int height() const { return height_; }
    FieldUnits units() const { return units_; }
    void set_units(FieldUnits u) { units_ = u; }

    double at(int x, int y) const {
        return values_[static_cast<size_t>(y) * width_ + x];
    }
    void set(int x, int y, double v) {
        values_[static_cast<size_t>(y) * width_ + x] = v;
    }
    bool defined(int x, int y) const {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
        return !std::isnan(at(x, y));
    }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    int width_ = 0;
    int height_ = 0;
    FieldUnits units_ = FieldUnits::Pixels;
    std::vector<double> values_;
};

/// Stack of fields indexed by integer scale s = 0..S_max.
struct ScaleSpace {
    std::vector<ScalarField> levels;

    int max_scale() const { return static_cast<int>(levels.size()) - 1; }
};

/// Half-width profile of a straightened body sampled along its axis.
struct Profile {
    std::vector<double> station;     ///< x position on the straightened axis
    std::vector<double> half_width;  ///< lambda/2 at each station
};

}  // namespace unwrap
