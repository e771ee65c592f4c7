#pragma once

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace hvp {

enum class Metric { hyperbolic, euclidean };

inline const char* to_string(Metric m) { return m == Metric::hyperbolic ? "hyp" : "euc"; }

inline Metric parse_metric(const std::string& s) {
    if (s == "hyp" || s == "hyperbolic") return Metric::hyperbolic;
    if (s == "euc" || s == "euclidean") return Metric::euclidean;
    throw DomainError("unknown metric '" + s + "' (expected hyp or euc)");
}

/// The hyperbolic disk B_H(o, rho) centered at the origin.
struct CenteredHypDisk {
    double rho = 0.0;

    double euclid_radius() const { return euclid_radius_of(rho); }
    bool contains(Vec2 p) const { return p.norm() <= euclid_radius(); }
    Box bounding_box() const {
        const double r = euclid_radius();
        return {-r, r, -r, r};
    }
};

using Window = std::variant<CenteredHypDisk, Box>;

inline bool window_contains(const Window& w, Vec2 p) {
    return std::visit([&](const auto& x) { return x.contains(p); }, w);
}

inline Box window_box(const Window& w) {
    if (const auto* d = std::get_if<CenteredHypDisk>(&w)) return d->bounding_box();
    return std::get<Box>(w);
}

/// Largest Euclidean norm attained on the closed window.
inline double window_max_norm(const Window& w) {
    if (const auto* d = std::get_if<CenteredHypDisk>(&w)) return d->euclid_radius();
    const Box& b = std::get<Box>(w);
    return b.farthest_from({0.0, 0.0}).norm();
}

enum class Color : std::uint8_t { black, white };

inline Color opposite(Color c) { return c == Color::black ? Color::white : Color::black; }

struct SimulationParams {
    double lambda = 1.0;
    double p = 0.5;
    Metric metric = Metric::hyperbolic;
    Window window = CenteredHypDisk{1.0};
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lambda >= 0.0)) throw DomainError("intensity must be nonnegative");
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
    }
};

/// A finite marked point set: Z = Z_b u Z_w on a window.
struct MarkedConfiguration {
    std::vector<Vec2> points;
    std::vector<Color> colors;
    /// Per-point uniforms behind the marks: black iff u < p. Kept so the same
    /// points can be re-marked at another p with shared randomness.
    std::vector<double> mark_uniforms;
    Window window = CenteredHypDisk{1.0};
    SimulationParams params;

    std::size_t size() const { return points.size(); }
    std::size_t count(Color c) const { return static_cast<std::size_t>(std::count(colors.begin(), colors.end(), c)); }
    std::vector<Vec2> points_of(Color c) const {
        std::vector<Vec2> out;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (colors[i] == c) out.push_back(points[i]);
        return out;
    }

    void validate() const {
        if (colors.size() != points.size()) throw InternalError("marks and points differ in length");
        for (const Vec2& p : points)
            if (!window_contains(window, p)) throw DomainError("point outside the configuration window");
        std::vector<Vec2> sorted = points;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw DegenerateInput("configuration contains duplicate points");
    }
};

namespace detail {

// Replaces later copies of coincident points by fresh draws.
template <class Draw>
void resample_duplicates(std::vector<Vec2>& pts, Draw&& draw) {
    for (;;) {
        std::vector<std::size_t> order(pts.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pts[a] < pts[b] || (pts[a] == pts[b] && a < b);
        });
        bool clean = true;
        for (std::size_t k = 1; k < order.size(); ++k) {
            if (pts[order[k]] == pts[order[k - 1]]) {
                pts[order[k]] = draw();
                clean = false;
            }
        }
        if (clean) return;
    }
}

inline void check_window_inside_disk(const Window& w) {
    if (!(window_max_norm(w) < 1.0 - kBoundaryEps)) throw DomainError("sampling window touches the boundary of the disk");
}

}  // namespace detail

/// Homogeneous hyperbolic Poisson process of intensity lambda on a window strictly
/// inside the disk, i.e. the planar process with intensity lambda * 4 / (1 - |u|^2)^2.
inline std::vector<Vec2> sample_hyp_ppp(double lambda, const Window& window, Rng& rng) {
    if (!(lambda >= 0.0)) throw DomainError("intensity must be nonnegative");
    detail::check_window_inside_disk(window);
    std::vector<Vec2> pts;
    if (lambda == 0.0) return pts;

    if (const auto* disk = std::get_if<CenteredHypDisk>(&window)) {
        // Radial inverse CDF: cosh r = 1 + U (cosh rho - 1).
        const double rho = disk->rho;
        const double cm1 = std::cosh(rho) - 1.0;
        auto draw = [&] {
            const double x = rng.uniform() * cm1;
            const double r = std::log1p(x + std::sqrt(x * (x + 2.0)));
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double e = std::fmin(euclid_radius_of(r), disk->euclid_radius());
            return Vec2{e * std::cos(angle), e * std::sin(angle)};
        };
        const std::uint64_t n = rng.poisson(lambda * 2.0 * std::numbers::pi * cm1);
        pts.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) pts.push_back(draw());
        detail::resample_duplicates(pts, draw);
        return pts;
    }

    // Box: thin a homogeneous process at the maximal density, attained at the corner farthest from o.
    const Box& box = std::get<Box>(window);
    const double fmax = hyp_density(box.farthest_from({0.0, 0.0}));
    auto uniform_in_box = [&] { return Vec2{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)}; };
    auto draw_accepted = [&] {
        for (;;) {
            const Vec2 u = uniform_in_box();
            if (rng.uniform() * fmax < hyp_density(u)) return u;
        }
    };
    const std::uint64_t n = rng.poisson(lambda * fmax * box.area());
    for (std::uint64_t i = 0; i < n; ++i) {
        const Vec2 u = uniform_in_box();
        if (rng.uniform() * fmax < hyp_density(u)) pts.push_back(u);
    }
    detail::resample_duplicates(pts, draw_accepted);
    return pts;
}

/// Homogeneous Euclidean Poisson process of intensity mu on a box.
inline std::vector<Vec2> sample_euclid_ppp(double mu, const Box& box, Rng& rng) {
    if (!(mu >= 0.0)) throw DomainError("intensity must be nonnegative");
    if (!(box.width() > 0.0 && box.height() > 0.0)) throw DomainError("degenerate sampling box");
    std::vector<Vec2> pts;
    if (mu == 0.0) return pts;
    auto draw = [&] { return Vec2{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)}; };
    const std::uint64_t n = rng.poisson(mu * box.area());
    pts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) pts.push_back(draw());
    detail::resample_duplicates(pts, draw);
    return pts;
}

/// Independent marks: black with probability p.
inline MarkedConfiguration mark(std::vector<Vec2> points, double p, Rng& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
    MarkedConfiguration c;
    c.points = std::move(points);
    c.mark_uniforms.resize(c.points.size());
    c.colors.resize(c.points.size());
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        c.mark_uniforms[i] = rng.uniform();
        c.colors[i] = c.mark_uniforms[i] < p ? Color::black : Color::white;
    }
    c.params.p = p;
    return c;
}

/// Same points and mark uniforms, colored at a different p.
inline MarkedConfiguration remark(MarkedConfiguration c, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
    for (std::size_t i = 0; i < c.points.size(); ++i) c.colors[i] = c.mark_uniforms[i] < p ? Color::black : Color::white;
    c.params.p = p;
    return c;
}

/// Sample and mark a configuration from parameters. Points and marks use separate
/// streams derived from the seed.
inline MarkedConfiguration sample_configuration(const SimulationParams& params) {
    params.validate();
    Rng point_rng(derive_seed(params.seed, 0));
    Rng mark_rng(derive_seed(params.seed, 1));
    std::vector<Vec2> pts;
    if (params.metric == Metric::hyperbolic) {
        pts = sample_hyp_ppp(params.lambda, params.window, point_rng);
    } else {
        if (!std::holds_alternative<Box>(params.window)) throw DomainError("Euclidean sampling needs a box window");
        pts = sample_euclid_ppp(params.lambda, std::get<Box>(params.window), point_rng);
    }
    MarkedConfiguration c = mark(std::move(pts), params.p, mark_rng);
    c.window = params.window;
    c.params = params;
    return c;
}

}  // namespace hvp
