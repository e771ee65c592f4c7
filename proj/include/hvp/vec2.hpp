#pragma once

#include <cmath>
#include <compare>

namespace hvp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr auto operator<=>(const Vec2&) const = default;

    constexpr double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// Counter-clockwise quarter turn.
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline Vec2 rotate(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Axis-parallel Euclidean box [xmin,xmax] x [ymin,ymax].
struct Box {
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
    Vec2 center() const { return {(xmin + xmax) / 2, (ymin + ymax) / 2}; }
    bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    bool contains(const Box& b) const {
        return b.xmin >= xmin && b.xmax <= xmax && b.ymin >= ymin && b.ymax <= ymax;
    }
    Box dilated(double d) const { return {xmin - d, xmax + d, ymin - d, ymax + d}; }
    /// Point of the closed box nearest to q.
    Vec2 clamp(Vec2 q) const {
        return {std::fmin(std::fmax(q.x, xmin), xmax), std::fmin(std::fmax(q.y, ymin), ymax)};
    }
    /// Point of the closed box farthest from q.
    Vec2 farthest_from(Vec2 q) const {
        return {std::fabs(q.x - xmin) > std::fabs(q.x - xmax) ? xmin : xmax,
                std::fabs(q.y - ymin) > std::fabs(q.y - ymax) ? ymin : ymax};
    }
    double diameter() const { return std::hypot(width(), height()); }
};

/// Euclidean disk (closed for containment tests).
struct Disk {
    Vec2 center;
    double radius = 0.0;

    bool contains(Vec2 p) const { return (p - center).norm2() <= radius * radius; }
    Box bounding_box() const {
        return {center.x - radius, center.x + radius, center.y - radius, center.y + radius};
    }
    double diameter() const { return 2 * radius; }
};

}  // namespace hvp
