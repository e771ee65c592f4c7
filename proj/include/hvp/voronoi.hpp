#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "delaunay.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "pointprocess.hpp"
#include "vec2.hpp"

namespace hvp {

// ---------------------------------------------------------------------------
// Euclidean adjacency and cells

/// True iff the cells of sites i and j share a Voronoi edge, i.e. (i, j) is a Delaunay edge.
inline bool euclid_adjacent(int i, int j, const VoronoiComplex& complex) {
    complex.check_site(i);
    complex.check_site(j);
    if (i == j) throw DomainError("adjacency of a site with itself");
    return complex.find_edge(i, j).has_value();
}

inline double polygon_area(std::span<const Vec2> poly) {
    double a = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) a += cross(poly[k], poly[(k + 1) % poly.size()]);
    return 0.5 * a;
}

namespace detail {

// Keeps the part of a convex polygon where dot(q - anchor, normal) <= 0.
inline std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, Vec2 anchor, Vec2 normal) {
    std::vector<Vec2> out;
    if (poly.empty()) return out;
    out.reserve(poly.size() + 1);
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2 a = poly[k], b = poly[(k + 1) % poly.size()];
        const double fa = dot(a - anchor, normal), fb = dot(b - anchor, normal);
        if (fa <= 0) out.push_back(a);
        if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) out.push_back(a + (b - a) * (fa / (fa - fb)));
    }
    if (out.size() < 3) out.clear();
    return out;
}

}  // namespace detail

/// cell_R(z) intersected with a convex polygon (counter-clockwise), by clipping with the
/// bisector half-planes of the Delaunay neighbors. Empty when they do not meet.
inline std::vector<Vec2> cell_clip(int site, const std::vector<Vec2>& convex_region, const VoronoiComplex& complex) {
    complex.check_site(site);
    const Vec2 z = complex.sites[static_cast<std::size_t>(site)];
    std::vector<Vec2> poly = convex_region;
    for (int nb : complex.neighbors(site)) {
        const Vec2 w = complex.sites[static_cast<std::size_t>(nb)];
        poly = detail::clip_halfplane(poly, (z + w) * 0.5, w - z);
        if (poly.empty()) break;
    }
    return poly;
}

inline std::vector<Vec2> cell_clip(int site, const Box& rect, const VoronoiComplex& complex) {
    if (!(rect.width() > 0 && rect.height() > 0)) throw DomainError("degenerate clipping rectangle");
    return cell_clip(site, to_polygon(rect).vertices, complex);
}

// ---------------------------------------------------------------------------
// Nearest sites

namespace detail {

// Monotone in the distance for a fixed query: squared length for Euclidean,
// |u - z|^2 / (1 - |z|^2) for hyperbolic (the query factor is common to all sites).
inline double nearest_key(Vec2 u, Vec2 z, Metric m) {
    const double d2 = (u - z).norm2();
    return m == Metric::euclidean ? d2 : d2 / one_minus_norm2(z);
}

}  // namespace detail

/// Index of the site nearest to u under the metric; ties go to the lowest index.
inline int nearest_site(Vec2 u, std::span<const Vec2> sites, Metric metric) {
    if (sites.empty()) throw DegenerateInput("nearest site of an empty site set");
    int best = 0;
    double best_key = detail::nearest_key(u, sites[0], metric);
    for (std::size_t i = 1; i < sites.size(); ++i) {
        const double k = detail::nearest_key(u, sites[i], metric);
        if (k < best_key) {
            best_key = k;
            best = static_cast<int>(i);
        }
    }
    return best;
}

/// Uniform bucket grid over the sites for nearest-site and range queries.
class SiteIndex {
  public:
    explicit SiteIndex(std::span<const Vec2> sites) : sites_(sites.begin(), sites.end()) {
        if (sites_.empty()) throw DegenerateInput("site index over an empty site set");
        bounds_ = {kInf, -kInf, kInf, -kInf};
        for (const Vec2& p : sites_) {
            bounds_.xmin = std::min(bounds_.xmin, p.x);
            bounds_.xmax = std::max(bounds_.xmax, p.x);
            bounds_.ymin = std::min(bounds_.ymin, p.y);
            bounds_.ymax = std::max(bounds_.ymax, p.y);
        }
        const double span = std::max({bounds_.width(), bounds_.height(), 1e-12});
        cell_ = span / std::max(1.0, std::sqrt(static_cast<double>(sites_.size()) / 2.0));
        nx_ = static_cast<int>(bounds_.width() / cell_) + 1;
        ny_ = static_cast<int>(bounds_.height() / cell_) + 1;
        start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
        for (const Vec2& p : sites_) ++start_[bucket(p) + 1];
        for (std::size_t k = 1; k < start_.size(); ++k) start_[k] += start_[k - 1];
        items_.resize(sites_.size());
        std::vector<int> fill(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < sites_.size(); ++i) items_[static_cast<std::size_t>(fill[bucket(sites_[i])]++)] = static_cast<int>(i);
    }

    std::size_t size() const { return sites_.size(); }
    const std::vector<Vec2>& sites() const { return sites_; }

    /// Same answer as nearest_site, including the lowest-index tie rule.
    int nearest(Vec2 u, Metric metric) const {
        const int cx = clamp_x(u), cy = clamp_y(u);
        int best = -1;
        double best_key = kInf;
        for (int ring = 0;; ++ring) {
            visit_ring(cx, cy, ring, [&](int i) {
                const double k = detail::nearest_key(u, sites_[static_cast<std::size_t>(i)], metric);
                if (k < best_key || (k == best_key && i < best)) {
                    best_key = k;
                    best = i;
                }
            });
            // Every site outside the scanned block has Euclidean distance >= gap, and both
            // keys are bounded below by the squared Euclidean distance.
            const double gap = ring_gap(u, cx, cy, ring);
            if ((best >= 0 && gap * gap > best_key) || ring > nx_ + ny_) return best;
        }
    }

    /// Sites with Euclidean distance < radius from u.
    template <class F>
    void within(Vec2 u, double radius, F&& f) const {
        const int x0 = clamp_x(u - Vec2{radius, 0}), x1 = clamp_x(u + Vec2{radius, 0});
        const int y0 = clamp_y(u - Vec2{0, radius}), y1 = clamp_y(u + Vec2{0, radius});
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                for (int k = start_[idx(x, y)]; k < start_[idx(x, y) + 1]; ++k) {
                    const int i = items_[static_cast<std::size_t>(k)];
                    if ((sites_[static_cast<std::size_t>(i)] - u).norm2() < radius * radius) f(i);
                }
    }

  private:
    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }
    int clamp_x(Vec2 p) const { return std::clamp(static_cast<int>(std::floor((p.x - bounds_.xmin) / cell_)), 0, nx_ - 1); }
    int clamp_y(Vec2 p) const { return std::clamp(static_cast<int>(std::floor((p.y - bounds_.ymin) / cell_)), 0, ny_ - 1); }
    std::size_t bucket(Vec2 p) const { return idx(clamp_x(p), clamp_y(p)); }

    template <class F>
    void visit_ring(int cx, int cy, int ring, F&& f) const {
        for (int y = cy - ring; y <= cy + ring; ++y) {
            if (y < 0 || y >= ny_) continue;
            const bool edge_row = (y == cy - ring || y == cy + ring);
            for (int x = cx - ring; x <= cx + ring; x += (edge_row ? 1 : 2 * std::max(ring, 1))) {
                if (x >= 0 && x < nx_)
                    for (int k = start_[idx(x, y)]; k < start_[idx(x, y) + 1]; ++k) f(items_[static_cast<std::size_t>(k)]);
                if (ring == 0) break;
            }
        }
    }

    // Distance from u to the complement of the block of cells within `ring` of (cx, cy).
    double ring_gap(Vec2 u, int cx, int cy, int ring) const {
        double g = kInf;
        if (cx - ring > 0) g = std::min(g, u.x - (bounds_.xmin + (cx - ring) * cell_));
        if (cx + ring < nx_ - 1) g = std::min(g, bounds_.xmin + (cx + ring + 1) * cell_ - u.x);
        if (cy - ring > 0) g = std::min(g, u.y - (bounds_.ymin + (cy - ring) * cell_));
        if (cy + ring < ny_ - 1) g = std::min(g, bounds_.ymin + (cy + ring + 1) * cell_ - u.y);
        return std::max(g, 0.0);
    }

    std::vector<Vec2> sites_;
    Box bounds_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<int> start_;
    std::vector<int> items_;
};

// ---------------------------------------------------------------------------
// Hyperbolic adjacency

namespace detail {

using Lvec = std::array<long double, 3>;

inline Lvec hyperboloid(Vec2 z) {
    const long double x = z.x, y = z.y;
    const long double s = 1.0L - x * x - y * y;
    return {(1.0L + x * x + y * y) / s, 2.0L * x / s, 2.0L * y / s};
}

inline long double lorentz(const Lvec& a, const Lvec& b) { return a[0] * b[0] - a[1] * b[1] - a[2] * b[2]; }

inline Vec2 from_hyperboloid(const Lvec& w) {
    return {static_cast<double>(w[1] / (1.0L + w[0])), static_cast<double>(w[2] / (1.0L + w[0]))};
}

}  // namespace detail

/// The bisector geodesic of two sites, parametrized by hyperbolic arc length s:
/// w(s) = cosh(s) M + sinh(s) T on the hyperboloid, with M the hyperbolic midpoint.
class HypBisector {
  public:
    HypBisector(Vec2 z1, Vec2 z2) : z1_(z1) {
        const detail::Lvec p1 = detail::hyperboloid(z1), p2 = detail::hyperboloid(z2);
        p1_ = p1;
        detail::Lvec m{p1[0] + p2[0], p1[1] + p2[1], p1[2] + p2[2]};
        const long double mm = std::sqrt(detail::lorentz(m, m));
        for (auto& c : m) c /= mm;
        const detail::Lvec n{p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2]};
        // Lorentz cross product: orthogonal to both m and n in the Lorentz form.
        detail::Lvec t{m[1] * n[2] - m[2] * n[1], -(m[2] * n[0] - m[0] * n[2]), -(m[0] * n[1] - m[1] * n[0])};
        const long double tt = std::sqrt(-detail::lorentz(t, t));
        if (!(tt > 0)) throw DegenerateInput("bisector of coincident sites");
        for (auto& c : t) c /= tt;
        m_ = m;
        t_ = t;
    }

    Vec2 point_at(double s) const {
        const long double c = std::cosh(static_cast<long double>(s)), h = std::sinh(static_cast<long double>(s));
        return detail::from_hyperboloid({c * m_[0] + h * t_[0], c * m_[1] + h * t_[1], c * m_[2] + h * t_[2]});
    }

    /// Ideal endpoint reached as s -> +inf (sign > 0) or s -> -inf.
    Vec2 ideal_point(int sign) const {
        const long double g = sign > 0 ? 1.0L : -1.0L;
        const detail::Lvec e{m_[0] + g * t_[0], m_[1] + g * t_[1], m_[2] + g * t_[2]};
        return {static_cast<double>(e[1] / e[0]), static_cast<double>(e[2] / e[0])};
    }

    /// Coefficients (alpha, beta) of h(s) = alpha cosh s + beta sinh s, positive exactly
    /// where z3 is strictly closer to w(s) than the bisected sites are.
    std::array<long double, 2> dominance(Vec2 z3) const {
        const detail::Lvec p3 = detail::hyperboloid(z3);
        const detail::Lvec d{p1_[0] - p3[0], p1_[1] - p3[1], p1_[2] - p3[2]};
        return {detail::lorentz(m_, d), detail::lorentz(t_, d)};
    }

    /// Hyperbolic radius of the disk centered at w(s) through both sites.
    double radius_at(double s) const { return detail::hyp_distance(point_at(s), z1_); }

  private:
    Vec2 z1_;
    detail::Lvec p1_{}, m_{}, t_{};
};

/// The closed parameter interval of bisector points whose disk through both sites has
/// no site in its interior. Endpoints may be infinite.
struct HypWitness {
    double s_lo = -kInf;
    double s_hi = kInf;
};

namespace detail {

inline void check_in_disk(std::span<const Vec2> sites) {
    for (const Vec2& z : sites)
        if (!(z.norm() < 1.0 - kBoundaryEps)) throw DomainError("site outside the open unit disk");
}

}  // namespace detail

/// Empty-disk witness interval for sites i and j among `sites`, or nothing when no
/// hyperbolic disk through both avoids every other site. Each other site dominates a
/// set {s : alpha cosh s + beta sinh s > 0}, which is empty, a half-line, or everything.
inline std::optional<HypWitness> hyp_witness(int i, int j, std::span<const Vec2> sites) {
    if (i == j) throw DomainError("adjacency of a site with itself");
    if (i < 0 || j < 0 || static_cast<std::size_t>(std::max(i, j)) >= sites.size()) throw DomainError("unknown site index");
    detail::check_in_disk(sites);
    const HypBisector bis(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
    HypWitness w;
    for (std::size_t k = 0; k < sites.size(); ++k) {
        if (static_cast<int>(k) == i || static_cast<int>(k) == j) continue;
        const auto [alpha, beta] = bis.dominance(sites[k]);
        // Allowed where alpha + beta tanh s <= 0.
        if (beta == 0) {
            if (alpha > 0) return std::nullopt;
            continue;
        }
        const long double c = -alpha / beta;  // tanh s at the sign change
        if (beta > 0) {
            if (c <= -1) return std::nullopt;
            if (c < 1) w.s_hi = std::min(w.s_hi, static_cast<double>(std::atanh(c)));
        } else {
            if (c >= 1) return std::nullopt;
            if (c > -1) w.s_lo = std::max(w.s_lo, static_cast<double>(std::atanh(c)));
        }
        if (w.s_lo > w.s_hi) return std::nullopt;
    }
    return w;
}

/// True iff some hyperbolic disk has sites i and j on its boundary and no site in its interior.
inline bool hyp_adjacent(int i, int j, std::span<const Vec2> sites) { return hyp_witness(i, j, sites).has_value(); }

/// Endpoints of the hyperbolic Voronoi edge of sites i and j (ideal points on the unit
/// circle for unbounded ends), or nothing when the cells do not touch.
inline std::optional<std::array<Vec2, 2>> hyp_voronoi_edge(int i, int j, std::span<const Vec2> sites) {
    const auto w = hyp_witness(i, j, sites);
    if (!w) return std::nullopt;
    const HypBisector bis(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
    return std::array<Vec2, 2>{std::isfinite(w->s_lo) ? bis.point_at(w->s_lo) : bis.ideal_point(-1),
                               std::isfinite(w->s_hi) ? bis.point_at(w->s_hi) : bis.ideal_point(1)};
}

/// A Delaunay edge is boundary-uncertain for a window disk of Euclidean radius R when
/// every empty disk through its sites leaves the window, i.e. when the minimum over the
/// Voronoi edge piece of |c| + |c - z| is at least R (up to a conservative tolerance).
inline bool boundary_uncertain(const DelaunayEdge& e, const VoronoiComplex& complex, double window_radius,
                               double tol = 1e-9) {
    const Vec2 z = complex.sites[static_cast<std::size_t>(e.a)];
    const VoronoiPiece& pc = e.piece;
    const double dn = pc.direction.norm();
    if (dn == 0) {
        const Vec2 c = pc.origin;
        return c.norm() + (c - z).norm() >= window_radius - tol;
    }
    // Beyond |c| > R + 2 the objective exceeds R, so the search range can be truncated.
    const double reach = (window_radius + 2.0 + pc.origin.norm()) / dn;
    double lo = std::max(pc.t_min, -reach), hi = std::min(pc.t_max, reach);
    if (lo > hi) return true;
    auto g = [&](double t) {
        const Vec2 c = pc.at(t);
        return c.norm() + (c - z).norm();
    };
    constexpr double kPhi = 0.6180339887498949;
    double x1 = hi - kPhi * (hi - lo), x2 = lo + kPhi * (hi - lo);
    double g1 = g(x1), g2 = g(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::fabs(lo) + std::fabs(hi)); ++it) {
        if (g1 < g2) {
            hi = x2; x2 = x1; g2 = g1;
            x1 = hi - kPhi * (hi - lo); g1 = g(x1);
        } else {
            lo = x1; x1 = x2; g1 = g2;
            x2 = lo + kPhi * (hi - lo); g2 = g(x2);
        }
    }
    const double best = std::min({g1, g2, g(lo), g(hi)});
    return best >= window_radius - tol;
}

}  // namespace hvp
