#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "vec2.hpp"

namespace hvp {

using Complex = std::complex<double>;

/// Points closer than this to the unit circle are rejected.
inline constexpr double kBoundaryEps = 1e-12;

/// 1 - |u|^2 without cancellation for |u| near 1.
inline double one_minus_norm2(Vec2 u) {
    const double r = u.norm();
    return (1.0 - r) * (1.0 + r);
}

/// Area density of the Poincare disk, 4 / (1 - |u|^2)^2.
inline double hyp_density(Vec2 u) {
    const double s = one_minus_norm2(u);
    return 4.0 / (s * s);
}

/// Density as a function of the Euclidean radius alone.
inline double hyp_density_radial(double r) {
    const double s = (1.0 - r) * (1.0 + r);
    return 4.0 / (s * s);
}

/// A point of the open unit disk.
class PoincarePoint {
  public:
    constexpr PoincarePoint() = default;
    PoincarePoint(double x, double y) : p_{x, y} {
        if (!(std::sqrt(x * x + y * y) < 1.0 - kBoundaryEps))
            throw DomainError("point (" + std::to_string(x) + ", " + std::to_string(y) +
                              ") is not inside the open unit disk");
    }
    explicit PoincarePoint(Vec2 v) : PoincarePoint(v.x, v.y) {}
    explicit PoincarePoint(Complex z) : PoincarePoint(z.real(), z.imag()) {}

    static constexpr PoincarePoint origin() { return {}; }

    double x() const { return p_.x; }
    double y() const { return p_.y; }
    Vec2 vec() const { return p_; }
    Complex complex() const { return {p_.x, p_.y}; }
    double norm() const { return p_.norm(); }

    friend bool operator==(const PoincarePoint&, const PoincarePoint&) = default;

  private:
    Vec2 p_;
};

namespace detail {

inline double hyp_distance(Vec2 u, Vec2 v) {
    const double d = (u - v).norm();
    if (d == 0.0) return 0.0;
    return 2.0 * std::asinh(d / std::sqrt(one_minus_norm2(u) * one_minus_norm2(v)));
}

/// cosh of the hyperbolic distance; cheap and monotone, used for comparisons.
inline double hyp_cosh_distance(Vec2 u, Vec2 v) {
    return 1.0 + 2.0 * (u - v).norm2() / (one_minus_norm2(u) * one_minus_norm2(v));
}

}  // namespace detail

/// Hyperbolic distance between two points of the disk.
inline double hyp_distance(const PoincarePoint& u, const PoincarePoint& v) {
    return detail::hyp_distance(u.vec(), v.vec());
}

/// Euclidean radius of the point at hyperbolic distance rho from the origin.
inline double euclid_radius_of(double rho) { return std::tanh(rho / 2.0); }
/// Hyperbolic distance from the origin of a point at Euclidean radius r.
inline double hyp_radius_of(double r) { return 2.0 * std::atanh(r); }

// ---------------------------------------------------------------------------
// Regions and area

struct EmptyRegion {};

/// Hyperbolic disk B_H(center, radius).
struct HypDisk {
    PoincarePoint center;
    double radius = 0.0;
};

struct Polygon {
    std::vector<Vec2> vertices;
};

using AreaRegion = std::variant<EmptyRegion, HypDisk, Box, Polygon>;

inline Polygon to_polygon(const Box& b) {
    return {{{b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, b.ymax}, {b.xmin, b.ymax}}};
}

namespace detail {

// Integral of the area density from (0, y) to (x, y), in closed form.
inline double density_antiderivative_x(double x, double y) {
    const double b2 = (1.0 - y) * (1.0 + y);
    const double b = std::sqrt(b2);
    return 2.0 * x / (b2 * (b - x) * (b + x)) + 2.0 * std::atanh(x / b) / (b2 * b);
}

inline double polygon_hyp_area(const std::vector<Vec2>& poly, double tol) {
    if (poly.size() < 3) return 0.0;
    for (const Vec2& v : poly)
        if (!(v.norm() < 1.0 - kBoundaryEps)) throw DomainError("region is not contained in the unit disk");
    // Green's theorem: area = contour integral of P dy with dP/dx = density.
    double total = 0.0;
    const double edge_tol = tol / static_cast<double>(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
        const double dy = b.y - a.y;
        if (dy == 0.0) continue;
        auto integrand = [&](double s) {
            const Vec2 p = a + (b - a) * s;
            return density_antiderivative_x(p.x, p.y) * dy;
        };
        total += integrate(integrand, 0.0, 1.0, edge_tol);
    }
    return std::fabs(total);
}

}  // namespace detail

/// Hyperbolic area of a region of the disk. Disks use the closed form, polygons
/// and boxes an adaptive quadrature to the given absolute tolerance.
inline double hyp_area(const AreaRegion& region, double abs_tol = 1e-10) {
    struct Visitor {
        double tol;
        double operator()(const EmptyRegion&) const { return 0.0; }
        double operator()(const HypDisk& d) const {
            if (d.radius < 0) throw DomainError("negative radius");
            const double s = std::sinh(d.radius / 2.0);
            return 4.0 * std::numbers::pi * s * s;
        }
        double operator()(const Box& b) const { return detail::polygon_hyp_area(to_polygon(b).vertices, tol); }
        double operator()(const Polygon& p) const { return detail::polygon_hyp_area(p.vertices, tol); }
    };
    return std::visit(Visitor{abs_tol}, region);
}

/// Hyperbolic area of the Euclidean disk B_R(o, r), r < 1.
inline double hyp_area_centered_euclid_disk(double r) {
    return 4.0 * std::numbers::pi * r * r / ((1.0 - r) * (1.0 + r));
}

// ---------------------------------------------------------------------------
// Circles

struct HypCircleDescriptor {
    PoincarePoint center;
    double radius = 0.0;
};

/// A Euclidean circle, with its hyperbolic center and radius when it lies inside the disk.
struct Circle {
    Vec2 center;
    double radius = 0.0;
    std::optional<HypCircleDescriptor> hyp;
};

/// The Euclidean circle carrying the hyperbolic circle of radius rho around center.
inline Circle hyp_circle_to_euclid(const PoincarePoint& center, double rho) {
    if (rho < 0) throw DomainError("negative hyperbolic radius");
    const double t = std::tanh(rho / 2.0);
    const double c2 = center.vec().norm2();
    const double denom = 1.0 - c2 * t * t;
    Circle out;
    out.center = center.vec() * ((1.0 - t * t) / denom);
    out.radius = t * (1.0 - c2) / denom;
    out.hyp = HypCircleDescriptor{center, rho};
    return out;
}

/// Hyperbolic center and radius of a Euclidean circle strictly inside the disk.
inline Circle euclid_circle_to_hyp(Vec2 center, double radius) {
    if (radius < 0) throw DomainError("negative radius");
    const double c = center.norm();
    if (!(c + radius < 1.0 - kBoundaryEps)) throw DomainError("circle is not strictly inside the unit disk");
    const Vec2 dir = c > 0 ? center / c : Vec2{1.0, 0.0};
    const double h1 = hyp_radius_of(c - radius), h2 = hyp_radius_of(c + radius);
    Circle out{center, radius, std::nullopt};
    out.hyp = HypCircleDescriptor{PoincarePoint(dir * euclid_radius_of((h1 + h2) / 2.0)), (h2 - h1) / 2.0};
    return out;
}

// ---------------------------------------------------------------------------
// Isometries

/// Isometry of the disk: u -> e^{i rotation} (w - a) / (1 - conj(a) w), where w = u, or
/// conj(u) for reflective isometries, and a = w-image of the anchor. The anchor is the
/// point sent to the origin.
class DiskIsometry {
  public:
    DiskIsometry() = default;
    DiskIsometry(PoincarePoint anchor, double rotation, bool reflective)
        : anchor_(anchor), rotation_(std::remainder(rotation, 2 * std::numbers::pi)), reflective_(reflective) {}

    static DiskIsometry identity() { return {}; }
    static DiskIsometry rotation(double angle) { return {PoincarePoint::origin(), angle, false}; }
    /// Hyperbolic translation along the diameter through a, sending a to the origin.
    static DiskIsometry to_origin(PoincarePoint a) { return {a, 0.0, false}; }
    /// Complex conjugation (reflection in the real axis).
    static DiskIsometry conjugation() { return {PoincarePoint::origin(), 0.0, true}; }

    const PoincarePoint& anchor() const { return anchor_; }
    double rotation_angle() const { return rotation_; }
    bool reflective() const { return reflective_; }

    Complex apply(Complex z) const {
        const Complex w = reflective_ ? std::conj(z) : z;
        const Complex a = mobius_anchor();
        return std::polar(1.0, rotation_) * (w - a) / (1.0 - std::conj(a) * w);
    }
    Complex apply_inverse(Complex z) const {
        const Complex a = mobius_anchor();
        const Complex m = std::polar(1.0, -rotation_) * z;
        const Complex w = (m + a) / (1.0 + std::conj(a) * m);
        return reflective_ ? std::conj(w) : w;
    }
    Vec2 apply(Vec2 v) const { return to_vec(apply(Complex{v.x, v.y})); }
    Vec2 apply_inverse(Vec2 v) const { return to_vec(apply_inverse(Complex{v.x, v.y})); }
    PoincarePoint operator()(const PoincarePoint& u) const { return PoincarePoint(clamp_inside(apply(u.complex()))); }

    DiskIsometry inverse() const {
        return fit([this](Complex z) { return apply_inverse(z); }, apply(Complex{0.0, 0.0}), reflective_);
    }

    /// this o other (apply other first).
    DiskIsometry compose(const DiskIsometry& other) const {
        const Complex pre_origin = other.apply_inverse(apply_inverse(Complex{0.0, 0.0}));
        return fit([&](Complex z) { return apply(other.apply(z)); }, pre_origin, reflective_ != other.reflective_);
    }

    /// Canonical parameters of an isometry known as a black box together with the
    /// preimage of the origin.
    template <class F>
    static DiskIsometry fit(F&& forward, Complex origin_preimage, bool reflective) {
        const PoincarePoint anchor(clamp_inside(origin_preimage));
        const Complex a = reflective ? std::conj(anchor.complex()) : anchor.complex();
        const Complex w1 = (0.5 + a) / (1.0 + std::conj(a) * 0.5);
        const Complex z1 = reflective ? std::conj(w1) : w1;
        return {anchor, std::arg(forward(z1) / 0.5), reflective};
    }

  private:
    Complex mobius_anchor() const { return reflective_ ? std::conj(anchor_.complex()) : anchor_.complex(); }
    static Vec2 to_vec(Complex z) { return {z.real(), z.imag()}; }
    static Complex clamp_inside(Complex z) {
        const double r = std::abs(z), lim = 1.0 - 2 * kBoundaryEps;
        return r < lim ? z : z * (lim / r);
    }

    PoincarePoint anchor_;
    double rotation_ = 0.0;
    bool reflective_ = false;
};

// ---------------------------------------------------------------------------
// Geodesics

/// A complete geodesic: a diameter, or an arc of a circle meeting the unit circle at right angles.
struct Geodesic {
    std::array<Vec2, 2> ideal_endpoints;
    bool is_diameter = false;
    Vec2 center;          ///< carrier circle center, when not a diameter
    double radius = 0.0;  ///< carrier circle radius, when not a diameter

    /// Reflection (inversion) in the geodesic.
    Vec2 reflect(Vec2 z) const {
        if (is_diameter) {
            const Vec2 d = ideal_endpoints[1] - ideal_endpoints[0];
            const Vec2 n = perp(d) / d.norm();
            return z - n * (2.0 * dot(z, n));
        }
        const Vec2 q = z - center;
        return center + q * (radius * radius / q.norm2());
    }
    DiskIsometry reflection() const {
        return DiskIsometry::fit([this](Complex z) {
            const Vec2 r = reflect({z.real(), z.imag()});
            return Complex{r.x, r.y};
        }, [this] { const Vec2 r = reflect({0.0, 0.0}); return Complex{r.x, r.y}; }(), true);
    }
    /// Unit tangent of the geodesic at a point on it, oriented towards `toward` (also on it).
    Vec2 tangent_at(Vec2 at, Vec2 toward) const {
        Vec2 t = is_diameter ? ideal_endpoints[1] - ideal_endpoints[0] : perp(at - center);
        t = t / t.norm();
        return dot(t, toward - at) >= 0 ? t : -t;
    }
};

namespace detail {

inline Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a, ac = c - a;
    const double d = 2.0 * cross(ab, ac);
    const double ab2 = ab.norm2(), ac2 = ac.norm2();
    return a + Vec2{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
}

inline std::array<Vec2, 2> orthogonal_circle_endpoints(Vec2 c, double radius) {
    const double c2 = c.norm2(), cn = std::sqrt(c2);
    const Vec2 base = c / c2, side = perp(c) * (radius / (cn * cn));
    return {base - side, base + side};
}

}  // namespace detail

/// The geodesic through two distinct points of the disk.
inline Geodesic geodesic_through(Vec2 u, Vec2 v) {
    Geodesic g;
    const double scale = std::max(u.norm(), v.norm());
    if (scale == 0.0 || (u - v).norm() == 0.0) throw DomainError("geodesic needs two distinct points");
    if (std::fabs(cross(u, v)) <= 1e-15 * scale * (u - v).norm()) {
        const Vec2 dir = (u.norm() > v.norm() ? u : v);
        const Vec2 unit = dir / dir.norm();
        g.is_diameter = true;
        g.ideal_endpoints = {-unit, unit};
        return g;
    }
    // Inverting the point of larger norm in the unit circle gives a third point of the carrier.
    const Vec2 far = u.norm2() > v.norm2() ? u : v;
    const Vec2 inv = far / far.norm2();
    g.center = detail::circumcenter(u, v, inv);
    g.radius = (g.center - u).norm();
    g.ideal_endpoints = detail::orthogonal_circle_endpoints(g.center, g.radius);
    return g;
}

inline Geodesic geodesic_through(const PoincarePoint& u, const PoincarePoint& v) {
    return geodesic_through(u.vec(), v.vec());
}

/// Hyperbolic midpoint of u and v.
inline PoincarePoint hyp_midpoint(const PoincarePoint& u, const PoincarePoint& v) {
    const DiskIsometry t = DiskIsometry::to_origin(u);
    const Complex w = t.apply(v.complex());
    const double r = std::abs(w);
    if (r == 0.0) return u;
    const double half = euclid_radius_of(hyp_radius_of(r) / 2.0);
    return PoincarePoint(t.apply_inverse(w * (half / r)));
}

/// Interior angle at `vertex` between the geodesics towards a and b.
inline double geodesic_angle(Vec2 vertex, Vec2 a, Vec2 b) {
    // Map the vertex to the origin, where geodesics are straight rays.
    const DiskIsometry t = DiskIsometry::to_origin(PoincarePoint(vertex));
    const Complex ta = t.apply(Complex{a.x, a.y}), tb = t.apply(Complex{b.x, b.y});
    return std::fabs(std::arg(tb / ta));
}

// ---------------------------------------------------------------------------
// The (7,7,7) base triangle

/// Hyperbolic circumradius of the equilateral triangle with all angles 2 pi / 7.
inline double triangle_777_circumradius() {
    const double pi = std::numbers::pi;
    return std::acosh(1.0 / (std::tan(pi / 3.0) * std::tan(pi / 7.0)));
}

/// Equilateral triangle with angles 2 pi / 7 centered at the origin, first vertex on the positive x-axis.
inline std::array<PoincarePoint, 3> triangle_777() {
    const double r = euclid_radius_of(triangle_777_circumradius());
    std::array<PoincarePoint, 3> tri;
    for (int k = 0; k < 3; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 3.0;
        tri[k] = PoincarePoint(r * std::cos(a), r * std::sin(a));
    }
    return tri;
}

}  // namespace hvp
