#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "percolation.hpp"
#include "pointprocess.hpp"
#include "rng.hpp"
#include "vec2.hpp"

namespace hvp {

// ---------------------------------------------------------------------------
// Regions used by the coupling: boxes and Euclidean disks

inline double region_min_norm(const LocalRegion& a) {
    if (const auto* b = std::get_if<Box>(&a)) return b->clamp({0, 0}).norm();
    const Disk& d = std::get<Disk>(a);
    return std::max(0.0, d.center.norm() - d.radius);
}

inline double region_max_norm(const LocalRegion& a) {
    if (const auto* b = std::get_if<Box>(&a)) return b->farthest_from({0, 0}).norm();
    const Disk& d = std::get<Disk>(a);
    return d.center.norm() + d.radius;
}

inline double region_diameter(const LocalRegion& a) {
    if (const auto* b = std::get_if<Box>(&a)) return b->diameter();
    return std::get<Disk>(a).diameter();
}

inline bool region_contains(const LocalRegion& a, Vec2 u) {
    if (const auto* b = std::get_if<Box>(&a)) return b->contains(u);
    return std::get<Disk>(a).contains(u);
}

inline Box region_box(const LocalRegion& a) {
    if (const auto* b = std::get_if<Box>(&a)) return *b;
    return std::get<Disk>(a).bounding_box();
}

inline double region_area(const LocalRegion& a) {
    if (const auto* b = std::get_if<Box>(&a)) return b->area();
    const double r = std::get<Disk>(a).radius;
    return std::numbers::pi * r * r;
}

// ---------------------------------------------------------------------------
// Scales

/// Largest |f'| of the density f(u) = 4 / (1 - |u|^2)^2 on the closed disk of radius r.
inline double density_lipschitz(double r) {
    const double s = 1 - r * r;
    return 16 * r / (s * s * s);
}

struct ContinuityScale {
    double t = 0.0;      ///< diameter bound for the region A
    double delta = 0.0;  ///< absolute tolerance on f over A
    double lipschitz = 0.0;
};

/// t and the tolerance such that f varies by at most the tolerance over any set of
/// diameter t inside B(o, r). The tolerance is half the largest value for which the
/// white-side coupling still works given f >= 4.
inline ContinuityScale continuity_scale(double r, double p, double p_new) {
    if (!(r > 0 && r < 1)) throw DomainError("continuity scale needs 0 < r < 1");
    if (!(p_new > 0 && p_new < p && p < 1)) throw DomainError("continuity scale needs 0 < p_new < p < 1");
    ContinuityScale c;
    c.delta = 2 * (p - p_new) / (1 - p);
    c.lipschitz = density_lipschitz(r);
    c.t = c.delta / c.lipschitz;
    return c;
}

/// mu = lambda * inf over A of f, attained at the point of A nearest the origin.
inline double coupling_mu(const LocalRegion& a, double lambda) {
    if (!(region_max_norm(a) < 1)) throw DomainError("coupling region must lie inside the unit disk");
    return lambda * hyp_density_radial(region_min_norm(a));
}

// ---------------------------------------------------------------------------
// The coupling

struct CouplingSpec {
    double r = 0.5;
    double p = 0.6;
    double p_new = 0.55;
    double lambda = 1.0;
    LocalRegion a = Box{0, 0.01, 0, 0.01};

    ContinuityScale scale() const { return continuity_scale(r, p, p_new); }
    double mu() const { return coupling_mu(a, lambda); }

    void validate() const {
        const ContinuityScale s = scale();
        if (!(lambda > 0)) throw DomainError("coupling needs a positive intensity");
        if (!(region_diameter(a) <= s.t)) throw DomainError("region diameter exceeds the continuity scale t");
        if (!(region_max_norm(a) <= r)) throw DomainError("region is not inside B(o, r)");
    }
};

/// The three intensities of one side of the coupling. Side `black` couples the
/// hyperbolic process of intensity p lambda f with the Euclidean one of intensity
/// p_new mu; the white side couples (1 - p) lambda f with (1 - p_new) mu.
struct CouplingIntensities {
    double target_euclid = 0.0;  ///< constant Euclidean intensity
    double hyp_weight = 0.0;     ///< hyperbolic intensity is hyp_weight * f

    double phi0(Vec2 u) const { return std::min(target_euclid, hyp_weight * hyp_density(u)); }
    double phi1(Vec2 u) const { return target_euclid - phi0(u); }
    double phi2(Vec2 u) const { return hyp_weight * hyp_density(u) - phi0(u); }
};

inline CouplingIntensities black_intensities(const CouplingSpec& s) {
    return {s.p_new * s.mu(), s.p * s.lambda};
}
inline CouplingIntensities white_intensities(const CouplingSpec& s) {
    return {(1 - s.p_new) * s.mu(), (1 - s.p) * s.lambda};
}

struct CoupledSample {
    // Black side: Z_b = P0 u P2 is hyperbolic, Zt_b = P0 u P1 is Euclidean.
    std::vector<Vec2> p0, p1, p2;
    // White side: Z_w = P0w u P2w is hyperbolic, Zt_w = P0w u P1w is Euclidean.
    std::vector<Vec2> p0w, p1w, p2w;
    std::vector<Vec2> zb, zb_tilde, zw, zw_tilde;
    Box window;

    /// Hyperbolic marked configuration (Z_b, Z_w).
    MarkedConfiguration hyperbolic() const { return assemble(zb, zw); }
    /// Euclidean marked configuration (Zt_b, Zt_w).
    MarkedConfiguration euclidean() const { return assemble(zb_tilde, zw_tilde); }

  private:
    MarkedConfiguration assemble(const std::vector<Vec2>& b, const std::vector<Vec2>& w) const {
        MarkedConfiguration c;
        c.points = b;
        c.points.insert(c.points.end(), w.begin(), w.end());
        c.colors.assign(b.size(), Color::black);
        c.colors.resize(c.points.size(), Color::white);
        for (Color col : c.colors) c.mark_uniforms.push_back(col == Color::black ? 0.0 : 1.0);
        c.window = window;
        return c;
    }
};

namespace detail {

// Poisson process of intensity phi on a box by thinning from the constant bound.
inline std::vector<Vec2> sample_thinned(const std::function<double(Vec2)>& phi, double bound, const Box& box, Rng& rng) {
    std::vector<Vec2> pts;
    if (!(bound > 0)) return pts;
    const std::uint64_t n = rng.poisson(bound * box.area());
    for (std::uint64_t k = 0; k < n; ++k) {
        const Vec2 u{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)};
        const double v = phi(u);
        if (v > bound * (1 + 1e-12)) throw InternalError("thinning bound below the intensity");
        if (rng.uniform() * bound < v) pts.push_back(u);
    }
    return pts;
}

inline std::vector<Vec2> united(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    std::vector<Vec2> out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace detail

/// Samples the six processes on the working window and assembles both pairs.
inline CoupledSample build_coupling(const CouplingSpec& spec, const Box& window, std::uint64_t seed) {
    spec.validate();
    if (!window.contains(region_box(spec.a))) throw DomainError("working window does not contain the region");
    if (!(window.farthest_from({0, 0}).norm() < 1 - kBoundaryEps)) throw DomainError("working window leaves the unit disk");
    const double fmax = hyp_density(window.farthest_from({0, 0}));
    CoupledSample s;
    s.window = window;
    int stream = 0;
    for (bool black : {true, false}) {
        const CouplingIntensities ci = black ? black_intensities(spec) : white_intensities(spec);
        const double bound0 = std::min(ci.target_euclid, ci.hyp_weight * fmax);
        Rng r0(derive_seed(seed, static_cast<std::uint64_t>(stream++)));
        Rng r1(derive_seed(seed, static_cast<std::uint64_t>(stream++)));
        Rng r2(derive_seed(seed, static_cast<std::uint64_t>(stream++)));
        auto q0 = detail::sample_thinned([&](Vec2 u) { return ci.phi0(u); }, bound0, window, r0);
        auto q1 = detail::sample_thinned([&](Vec2 u) { return ci.phi1(u); }, ci.target_euclid, window, r1);
        auto q2 = detail::sample_thinned([&](Vec2 u) { return ci.phi2(u); }, ci.hyp_weight * fmax, window, r2);
        if (black) {
            s.p0 = std::move(q0);
            s.p1 = std::move(q1);
            s.p2 = std::move(q2);
        } else {
            s.p0w = std::move(q0);
            s.p1w = std::move(q1);
            s.p2w = std::move(q2);
        }
    }
    s.zb = detail::united(s.p0, s.p2);
    s.zb_tilde = detail::united(s.p0, s.p1);
    s.zw = detail::united(s.p0w, s.p2w);
    s.zw_tilde = detail::united(s.p0w, s.p1w);
    return s;
}

namespace detail {

inline bool subset_within(std::vector<Vec2> small, std::vector<Vec2> big, const LocalRegion& a) {
    std::erase_if(small, [&](Vec2 u) { return !region_contains(a, u); });
    std::erase_if(big, [&](Vec2 u) { return !region_contains(a, u); });
    std::sort(small.begin(), small.end());
    std::sort(big.begin(), big.end());
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

}  // namespace detail

/// Exact check of Zt_b n A in Z_b n A and Z_w n A in Zt_w n A.
inline bool verify_domination(const CoupledSample& s, const LocalRegion& a) {
    return detail::subset_within(s.zb_tilde, s.zb, a) && detail::subset_within(s.zw, s.zw_tilde, a);
}

/// Tolerance admissibility for the white side: (1 + delta/4)(1 - p) <= 1 - p_new.
inline bool tolerance_admissible(double p, double p_new, double delta) {
    return (1 + delta / 4) * (1 - p) <= (1 - p_new) * (1 + 1e-15);
}

/// A random valid specification: r, p_new < p, lambda, and a region of diameter t
/// (box or disk) placed inside B(o, r). The intensity is scaled so that A holds
/// about `target_count` points of each process.
inline CouplingSpec random_spec(Rng& rng, double target_count = 40) {
    CouplingSpec s;
    s.r = rng.uniform(0.1, 0.9);
    s.p = rng.uniform(0.2, 0.95);
    s.p_new = s.p * rng.uniform(0.3, 0.97);
    const ContinuityScale sc = s.scale();
    const bool disk = rng.uniform() < 0.5;
    const double size = std::min(sc.t, s.r) * rng.uniform(0.3, 0.999);
    // Center at a random point of B(o, r - size / 2).
    const double room = s.r - size / 2;
    const double rad = room * std::sqrt(rng.uniform()), ang = rng.uniform(0, 2 * std::numbers::pi);
    const Vec2 c{rad * std::cos(ang), rad * std::sin(ang)};
    if (disk) {
        s.a = Disk{c, size / 2};
    } else {
        const double side = size / std::numbers::sqrt2;
        s.a = Box{c.x - side / 2, c.x + side / 2, c.y - side / 2, c.y + side / 2};
    }
    const double min_f = hyp_density_radial(region_min_norm(s.a));
    s.lambda = target_count / (std::min(s.p_new, 1 - s.p) * min_f * region_area(s.a));
    s.validate();
    return s;
}

}  // namespace hvp
