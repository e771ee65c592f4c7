#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "delaunay.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "percolation.hpp"
#include "pointprocess.hpp"
#include "rng.hpp"
#include "vec2.hpp"
#include "voronoi.hpp"

namespace hvp {

inline constexpr const char* kVersion = "hvp 1.0.0";

// ---------------------------------------------------------------------------
// Intervals and parallel replicates

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Wilson score interval for k successes out of n at normal quantile z (95% by default).
inline Interval wilson(std::uint64_t k, std::uint64_t n, double z = 1.959963984540054) {
    if (n == 0) throw DomainError("Wilson interval needs n >= 1");
    if (k > n) throw DomainError("more successes than trials");
    const double nn = static_cast<double>(n), ph = static_cast<double>(k) / nn, z2 = z * z;
    const double denom = 1 + z2 / nn;
    const double center = (ph + z2 / (2 * nn)) / denom;
    const double half = z * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn)) / denom;
    // Clamp rounding so the interval always contains the point estimate.
    return {std::min(ph, std::max(0.0, center - half)), std::max(ph, std::min(1.0, center + half))};
}

/// Calls f(i) for i in [0, n) on up to `jobs` threads. Results must be written by
/// index, which keeps the reduction independent of scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::mutex m;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!failure) failure = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    const auto count = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Descriptors

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string describe(const Window& w) {
    if (const auto* d = std::get_if<CenteredHypDisk>(&w)) return "hypdisk:" + fmt_double(d->rho);
    const Box& b = std::get<Box>(w);
    return "box:" + fmt_double(b.xmin) + ";" + fmt_double(b.xmax) + ";" + fmt_double(b.ymin) + ";" + fmt_double(b.ymax);
}

inline std::string describe(const Rect& r) {
    return "rect:" + fmt_double(r.corner.x) + ";" + fmt_double(r.corner.y) + ";" + fmt_double(r.width) + ";" +
           fmt_double(r.height) + ";" + fmt_double(r.angle) + ";" + (r.crossing_axis() == Axis::horizontal ? "h" : "v");
}

inline std::string describe(const LocalRegion& a) {
    if (const auto* b = std::get_if<Box>(&a))
        return "box:" + fmt_double(b->xmin) + ";" + fmt_double(b->xmax) + ";" + fmt_double(b->ymin) + ";" + fmt_double(b->ymax);
    const Disk& d = std::get<Disk>(a);
    return "disk:" + fmt_double(d.center.x) + ";" + fmt_double(d.center.y) + ";" + fmt_double(d.radius);
}

// ---------------------------------------------------------------------------
// Records

struct ExperimentRecord {
    std::string kind;  ///< "crossing", "local" or "pc-step"
    Metric metric = Metric::hyperbolic;
    double lambda = 0.0;
    double p = 0.0;
    std::string window;
    std::string target;  ///< rectangle or event descriptor
    double margin = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t successes = 0;
    std::uint64_t undetermined = 0;  ///< replicates whose local monitor failed
    double estimate = 0.0;
    Interval ci;
    double wall_seconds = 0.0;
    bool truncated = false;  ///< stopped by the wall-time cap before n replicates
    std::string version = kVersion;

    /// Identity of the parameters and seed; equal identities denote the same computation.
    std::string id() const {
        return kind + "|" + to_string(metric) + "|" + fmt_double(lambda) + "|" + fmt_double(p) + "|" + window + "|" + target +
               "|" + fmt_double(margin) + "|" + std::to_string(n) + "|" + std::to_string(seed);
    }

    void finish(std::uint64_t k, std::uint64_t trials) {
        n = trials;
        successes = k;
        estimate = static_cast<double>(k) / static_cast<double>(trials);
        ci = wilson(k, trials);
    }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Crossing probabilities

struct CrossingExperiment {
    double lambda = 1.0;
    double p = 0.5;
    Metric metric = Metric::euclidean;
    Rect rect = Rect::from_box({0, 2, 0, 1});
    double margin = 1.0;  ///< window = bounding box of R dilated by the margin
    std::uint64_t n = 100;
    std::uint64_t seed = 0;
    Color color = Color::black;
    /// Grid divisor of the local(R, margin) monitor; 0 disables the monitor.
    int divisor = kLocalDivisor;
    int jobs = 1;
    double max_seconds = 0.0;  ///< wall-time cap per experiment, 0 for none

    Window window() const { return rect.bounding_box().dilated(margin); }

    void validate() const {
        rect.validate();
        if (!(lambda >= 0)) throw DomainError("intensity must be nonnegative");
        if (!(p >= 0 && p <= 1)) throw DomainError("p must lie in [0, 1]");
        if (!(margin > 0)) throw DomainError("the crossing window needs a positive margin");
        if (n < 1) throw DomainError("need at least one replicate");
        if (metric == Metric::hyperbolic && !(window_max_norm(window()) < 1 - kBoundaryEps))
            throw DomainError("infeasible window: R dilated by the margin leaves the unit disk");
    }
};

struct CrossingReplicate {
    bool crossed = false;
    bool determined = false;  ///< local(R, margin) held
    double threshold = kInf;  ///< black threshold of the replicate's mark uniforms
    std::size_t points = 0;
};

/// One replicate: sample, mark, triangulate, decide cross(R). The black threshold is
/// computed from the same uniforms and cross-checked against the decision.
inline CrossingReplicate crossing_replicate(const CrossingExperiment& e, std::uint64_t index) {
    SimulationParams sp;
    sp.lambda = e.lambda;
    sp.p = e.p;
    sp.metric = e.metric;
    sp.window = e.window();
    sp.seed = derive_seed(e.seed, index);
    const MarkedConfiguration z = sample_configuration(sp);
    CrossingReplicate out;
    out.points = z.size();
    if (z.points.empty()) return out;
    const VoronoiComplex vc = voronoi_complex(z.points);
    const CrossingGeometry geo(e.rect, vc);
    out.crossed = geo.crosses(z.colors, e.color);
    out.threshold = geo.black_threshold(z.mark_uniforms);
    if (e.color == Color::black && out.crossed != (e.p > out.threshold))
        throw InternalError("crossing decision disagrees with the threshold sweep");
    if (e.divisor > 0) {
        try {
            out.determined = local_event(e.rect.bounding_box(), e.margin, z.points, e.divisor, e.metric);
        } catch (const DegenerateInput&) {
            out.determined = false;
        }
    }
    return out;
}

/// All replicates in index order, honouring the wall-time cap between batches.
inline std::vector<CrossingReplicate> crossing_replicates(const CrossingExperiment& e, bool* truncated = nullptr) {
    e.validate();
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CrossingReplicate> out;
    const std::size_t batch = static_cast<std::size_t>(std::max(1, e.jobs)) * 16;
    if (truncated) *truncated = false;
    for (std::size_t start = 0; start < e.n; start += batch) {
        if (e.max_seconds > 0 && start > 0 && detail::seconds_since(t0) > e.max_seconds) {
            if (truncated) *truncated = true;
            break;
        }
        const std::size_t m = std::min<std::size_t>(batch, e.n - start);
        std::vector<CrossingReplicate> part(m);
        parallel_for(m, e.jobs, [&](std::size_t i) { part[i] = crossing_replicate(e, start + i); });
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

/// The parameter part of the record of a crossing experiment.
inline ExperimentRecord crossing_stub(const CrossingExperiment& e) {
    ExperimentRecord r;
    r.kind = "crossing";
    r.metric = e.metric;
    r.lambda = e.lambda;
    r.p = e.p;
    r.window = describe(e.window());
    r.target = describe(e.rect) + (e.color == Color::black ? ":black" : ":white") + ":div" + std::to_string(e.divisor);
    r.margin = e.margin;
    r.n = e.n;
    r.seed = e.seed;
    return r;
}

inline ExperimentRecord estimate_crossing(const CrossingExperiment& e) {
    const auto t0 = std::chrono::steady_clock::now();
    bool truncated = false;
    const auto reps = crossing_replicates(e, &truncated);
    ExperimentRecord r = crossing_stub(e);
    std::uint64_t k = 0;
    for (const auto& x : reps) {
        k += x.crossed;
        r.undetermined += e.divisor > 0 && !x.determined;
    }
    r.finish(k, reps.size());
    r.truncated = truncated;
    r.wall_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Probability of the local event

struct LocalExperiment {
    LocalRegion a = Box{-0.1, 0.1, -0.1, 0.1};
    double delta = 0.05;
    double lambda = 1.0;
    Metric metric = Metric::hyperbolic;
    std::uint64_t n = 100;
    std::uint64_t seed = 0;
    int divisor = kLocalDivisor;
    bool check_locality = true;  ///< probe checks on samples where the event holds
    double probe_pitch = 0.0;    ///< 0 means delta / 100
    int jobs = 1;
};

struct LocalResult {
    ExperimentRecord record;
    double analytic = 0.0;  ///< product formula over the squares
    std::uint64_t checked_samples = 0;
    std::uint64_t probes = 0;
    std::uint64_t euclid_violations = 0;
    std::uint64_t hyp_violations = 0;
};

/// Product over the grid squares of 1 - exp(-mass), with mass the expected count of the
/// square under the chosen intensity.
inline double local_event_probability(const LocalGrid& grid, double lambda, Metric metric) {
    if (lambda == 0) return 0.0;
    if (metric == Metric::hyperbolic) return LatticePoissonField::local_event_probability(grid, lambda);
    const double h = grid.pitch();
    return std::exp(static_cast<double>(grid.square_count()) * std::log1p(-std::exp(-lambda * h * h)));
}

inline ExperimentRecord local_stub(const LocalExperiment& e) {
    ExperimentRecord r;
    r.kind = "local";
    r.metric = e.metric;
    r.lambda = e.lambda;
    r.window = "grid:" + fmt_double(e.delta / e.divisor);
    r.target = describe(e.a) + ":delta" + fmt_double(e.delta) + ":div" + std::to_string(e.divisor);
    r.margin = e.delta;
    r.n = e.n;
    r.seed = e.seed;
    return r;
}

inline LocalResult estimate_local_prob(const LocalExperiment& e) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(e.lambda >= 0)) throw DomainError("intensity must be nonnegative");
    if (e.n < 1) throw DomainError("need at least one replicate");
    const LocalGrid grid(e.a, e.delta, e.divisor);
    detail::check_local_in_disk(grid, e.metric);
    LocalResult res;
    res.analytic = local_event_probability(grid, e.lambda, e.metric);
    struct One {
        bool event = false;
        LocalityReport rep;
        bool checked = false;
    };
    std::vector<One> reps(e.n);
    if (e.lambda > 0) {
        parallel_for(e.n, e.jobs, [&](std::size_t i) {
            const std::uint64_t s = derive_seed(e.seed, i);
            One& o = reps[i];
            if (e.metric == Metric::hyperbolic) {
                const LatticePoissonField field(grid, e.lambda, s);
                o.event = field.event();
                if (o.event && e.check_locality) {
                    o.rep = field.locality_check(e.probe_pitch, 1);
                    o.checked = true;
                }
            } else {
                Rng rng(s);
                const std::vector<Vec2> pts = sample_euclid_ppp(e.lambda, (std::holds_alternative<Box>(e.a) ? std::get<Box>(e.a) : std::get<Disk>(e.a).bounding_box()).dilated(e.delta), rng);
                o.event = grid.covered_by(pts);
                if (o.event && e.check_locality) {
                    o.rep = locality_check(e.a, e.delta, pts, e.probe_pitch);
                    o.rep.hyp_violations = 0;
                    o.checked = true;
                }
            }
        });
    }
    std::uint64_t k = 0;
    for (const One& o : reps) {
        k += o.event;
        if (!o.checked) continue;
        ++res.checked_samples;
        res.probes += o.rep.probes;
        res.euclid_violations += o.rep.euclid_violations;
        res.hyp_violations += o.rep.hyp_violations;
    }
    ExperimentRecord& r = res.record;
    r = local_stub(e);
    r.finish(k, e.n);
    r.wall_seconds = detail::seconds_since(t0);
    return res;
}

// ---------------------------------------------------------------------------
// Critical probability proxies

enum class PcProxy { crossing, reach };

inline const char* to_string(PcProxy p) { return p == PcProxy::crossing ? "crossing" : "reach"; }
inline PcProxy parse_proxy(const std::string& s) {
    if (s == "crossing") return PcProxy::crossing;
    if (s == "reach") return PcProxy::reach;
    throw DomainError("unknown proxy '" + s + "' (expected crossing or reach)");
}

struct PcExperiment {
    double lambda = 1.0;
    Metric metric = Metric::hyperbolic;
    PcProxy proxy = PcProxy::crossing;
    double tolerance = 1e-3;
    std::uint64_t n = 400;
    std::uint64_t seed = 0;
    int jobs = 1;
    /// Crossing proxy: the square whose black crossing probability is set to 1/2, and the
    /// sampling window. Defaults depend on the metric (see defaults()).
    std::optional<Rect> rect;
    std::optional<Window> window;
    /// Reach proxy: Euclidean radius the cluster of o must reach, and the target level.
    double reach_radius = 0.8;
    double level = 0.25;

    /// Hyperbolic mode: an off-center square crossed towards the boundary circle, sampled
    /// on the Euclidean disk of radius 0.97. A square centered at o would give exactly 1/2
    /// by its rotation symmetry.
    /// Euclidean mode: the unit square crossed left to right, sampled with margin 1.
    Rect effective_rect() const {
        if (rect) return *rect;
        if (metric == Metric::hyperbolic) return Rect{{0.3, -0.3}, 0.6, 0.6, 0.0, Axis::horizontal};
        return Rect{{0, 0}, 1.0, 1.0, 0.0, Axis::horizontal};
    }
    Window effective_window() const {
        if (window) return *window;
        if (metric == Metric::hyperbolic) return CenteredHypDisk{hyp_radius_of(0.97)};
        return effective_rect().bounding_box().dilated(1.0);
    }
};

struct PcEstimate {
    double lambda = 0.0;
    double p_lo = 0.0;
    double p_hi = 1.0;
    double estimate = 0.5;
    std::string proxy;
    std::vector<ExperimentRecord> steps;
    /// Per-replicate thresholds: the proxy event holds at p iff p > threshold.
    std::vector<double> thresholds;
};

namespace detail {

// Smallest uniform at which o's black cluster reaches the outer sites (|z| >= radius).
inline double reach_threshold(const MarkedConfiguration& z, const VoronoiComplex& vc, double radius) {
    const std::size_t n = z.size();
    const int origin = nearest_site({0, 0}, z.points, Metric::hyperbolic);
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return z.mark_uniforms[static_cast<std::size_t>(a)] < z.mark_uniforms[static_cast<std::size_t>(b)]; });
    UnionFind uf(n + 1);
    const int outer = static_cast<int>(n);
    std::vector<char> on(n, 0);
    for (int s : order) {
        on[static_cast<std::size_t>(s)] = 1;
        if (z.points[static_cast<std::size_t>(s)].norm() >= radius) uf.unite(s, outer);
        for (int t : vc.neighbors(s))
            if (on[static_cast<std::size_t>(t)]) uf.unite(s, t);
        if (on[static_cast<std::size_t>(origin)] && uf.find(origin) == uf.find(outer))
            return z.mark_uniforms[static_cast<std::size_t>(s)];
    }
    return kInf;
}

}  // namespace detail

/// Per-replicate thresholds of the chosen proxy event, computed once from shared uniforms.
inline std::vector<double> pc_thresholds(const PcExperiment& e) {
    if (!(e.lambda > 0)) throw DomainError("p_c estimation needs a positive intensity");
    if (e.n < 1) throw DomainError("need at least one replicate");
    const Rect rect = e.effective_rect();
    const Window window = e.effective_window();
    if (e.proxy == PcProxy::crossing) detail::check_margin(window, rect, 0.0);
    if (e.metric == Metric::euclidean && !std::holds_alternative<Box>(window))
        throw DomainError("Euclidean sampling needs a box window");
    std::vector<double> th(e.n, kInf);
    parallel_for(e.n, e.jobs, [&](std::size_t i) {
        SimulationParams sp;
        sp.lambda = e.lambda;
        sp.p = 0.5;
        sp.metric = e.metric;
        sp.window = window;
        sp.seed = derive_seed(e.seed, i);
        const MarkedConfiguration z = sample_configuration(sp);
        if (z.points.empty()) return;
        const VoronoiComplex vc = voronoi_complex(z.points);
        th[i] = e.proxy == PcProxy::crossing ? CrossingGeometry(rect, vc).black_threshold(z.mark_uniforms)
                                             : detail::reach_threshold(z, vc, e.reach_radius);
    });
    return th;
}

/// Bisection on p of the proxy probability against its level. All p values reuse the
/// same replicates and uniforms, so the estimated probability is monotone in p.
inline PcEstimate estimate_pc(const PcExperiment& e) {
    if (!(e.tolerance > 0 && e.tolerance < 1)) throw DomainError("bisection tolerance must lie in (0, 1)");
    const double level = e.proxy == PcProxy::crossing ? 0.5 : e.level;
    if (!(level > 0 && level < 1)) throw DomainError("proxy level must lie in (0, 1)");
    const auto t0 = std::chrono::steady_clock::now();
    PcEstimate out;
    out.lambda = e.lambda;
    out.thresholds = pc_thresholds(e);
    const Rect rect = e.effective_rect();
    out.proxy = std::string(to_string(e.proxy)) + ":" +
                (e.proxy == PcProxy::crossing ? describe(rect) : "reach:" + fmt_double(e.reach_radius) + ":level" + fmt_double(level));
    const std::string window = describe(e.effective_window());
    double lo = 0.0, hi = 1.0;
    std::vector<std::pair<double, std::uint64_t>> seen;
    while (hi - lo > e.tolerance) {
        const double mid = (lo + hi) / 2;
        std::uint64_t k = 0;
        for (double t : out.thresholds) k += mid > t;
        for (const auto& [q, kq] : seen)
            if ((q < mid && kq > k) || (q > mid && kq < k)) throw InternalError("proxy estimate not monotone in p");
        seen.emplace_back(mid, k);
        ExperimentRecord r;
        r.kind = "pc-step";
        r.metric = e.metric;
        r.lambda = e.lambda;
        r.p = mid;
        r.window = window;
        r.target = out.proxy;
        r.seed = e.seed;
        r.finish(k, e.n);
        r.wall_seconds = detail::seconds_since(t0);
        out.steps.push_back(r);
        (r.estimate < level ? lo : hi) = mid;
    }
    out.p_lo = lo;
    out.p_hi = hi;
    out.estimate = (lo + hi) / 2;
    return out;
}

}  // namespace hvp
