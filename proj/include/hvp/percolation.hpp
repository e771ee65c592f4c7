#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "delaunay.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "pointprocess.hpp"
#include "rng.hpp"
#include "vec2.hpp"
#include "voronoi.hpp"

namespace hvp {

// ---------------------------------------------------------------------------
// Rectangles

/// Direction of a crossing in the rectangle's own frame: horizontal joins the sides
/// x = 0 and x = width, vertical joins y = 0 and y = height.
enum class Axis { horizontal, vertical };

inline Axis perpendicular(Axis a) { return a == Axis::horizontal ? Axis::vertical : Axis::horizontal; }

/// A Euclidean rectangle: the image of [0, width] x [0, height] under rotation by
/// `angle` followed by translation to `corner`.
struct Rect {
    Vec2 corner;
    double width = 1.0;
    double height = 1.0;
    double angle = 0.0;
    std::optional<Axis> axis;  ///< crossing axis; defaults to the long direction

    static Rect from_box(const Box& b, std::optional<Axis> axis = std::nullopt) {
        return {{b.xmin, b.ymin}, b.width(), b.height(), 0.0, axis};
    }

    Axis crossing_axis() const {
        if (axis) return *axis;
        if (width == height) throw DomainError("a square needs an explicit crossing axis");
        return width > height ? Axis::horizontal : Axis::vertical;
    }

    Vec2 to_local(Vec2 p) const { return angle == 0.0 ? p - corner : rotate(p - corner, -angle); }
    Vec2 to_world(Vec2 q) const { return angle == 0.0 ? q + corner : rotate(q, angle) + corner; }
    Vec2 direction_to_local(Vec2 d) const { return angle == 0.0 ? d : rotate(d, -angle); }

    Box local_box() const { return {0.0, width, 0.0, height}; }
    std::vector<Vec2> corners() const {
        return {to_world({0, 0}), to_world({width, 0}), to_world({width, height}), to_world({0, height})};
    }
    Box bounding_box() const {
        Box b{kInf, -kInf, kInf, -kInf};
        for (const Vec2& c : corners()) {
            b.xmin = std::min(b.xmin, c.x);
            b.xmax = std::max(b.xmax, c.x);
            b.ymin = std::min(b.ymin, c.y);
            b.ymax = std::max(b.ymax, c.y);
        }
        return b;
    }
    bool contains(Vec2 p) const { return local_box().contains(to_local(p)); }
    Vec2 center() const { return to_world({width / 2, height / 2}); }

    void validate() const {
        if (!(width > 0 && height > 0)) throw DomainError("rectangle with nonpositive side");
    }
};

/// Ordered black (or white) sites whose clipped cells realize a crossing.
struct CrossingWitness {
    std::vector<int> sites;
};

namespace detail {

inline bool segment_meets_box(Vec2 o, Vec2 d, double t0, double t1, const Box& b) {
    // Liang-Barsky on the closed box.
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {o.x - b.xmin, b.xmax - o.x, o.y - b.ymin, b.ymax - o.y};
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0) {
            if (q[k] < 0) return false;
            continue;
        }
        const double r = q[k] / p[k];
        if (p[k] < 0) t0 = std::max(t0, r);
        else t1 = std::min(t1, r);
        if (t0 > t1) return false;
    }
    return true;
}

struct UnionFind {
    std::vector<int> parent, rank;
    explicit UnionFind(std::size_t n) : parent(n), rank(n, 0) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (rank[a] < rank[b]) std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
        if (rank[a] == rank[b]) ++rank[a];
        return true;
    }
};

inline void check_margin(const Window& window, const Rect& r, double margin) {
    if (margin < 0) throw DomainError("negative margin");
    bool ok = true;
    if (const auto* d = std::get_if<CenteredHypDisk>(&window)) {
        for (const Vec2& c : r.corners()) ok = ok && c.norm() + margin <= d->euclid_radius();
    } else {
        ok = std::get<Box>(window).contains(r.bounding_box().dilated(margin));
    }
    if (!ok) throw MarginError("sampling window does not contain the rectangle with the requested margin");
}

}  // namespace detail

/// The part of a tessellation relevant to crossings of one rectangle: the sites whose
/// cells meet the closed rectangle, which of them touch each designated side, and the
/// adjacencies whose shared Voronoi edge meets the rectangle. Independent of colors,
/// so one instance serves every marking of the same points.
class CrossingGeometry {
  public:
    CrossingGeometry(const Rect& rect, const VoronoiComplex& complex) : rect_(rect), axis_(rect.crossing_axis()) {
        rect.validate();
        if (complex.sites.empty()) throw DegenerateInput("crossing of an empty configuration");
        const Box box = rect.local_box();
        const std::size_t n = complex.sites.size();
        local_of_.assign(n, -1);
        // Cells meeting the rectangle form a connected set in the Delaunay graph; flood
        // from the cell containing the center.
        const int seed = nearest_site(rect.center(), complex.sites, Metric::euclidean);
        std::vector<char> seen(n, 0);
        std::deque<int> queue{seed};
        seen[static_cast<std::size_t>(seed)] = 1;
        while (!queue.empty()) {
            const int s = queue.front();
            queue.pop_front();
            const std::vector<Vec2> cell = local_cell(s, complex, box);
            if (cell.empty()) continue;
            const int id = static_cast<int>(sites_.size());
            local_of_[static_cast<std::size_t>(s)] = id;
            sites_.push_back(s);
            bool at_start = false, at_end = false;
            for (const Vec2& q : cell) {
                const double c = axis_ == Axis::horizontal ? q.x : q.y;
                const double len = axis_ == Axis::horizontal ? box.xmax : box.ymax;
                at_start = at_start || c <= 0.0;
                at_end = at_end || c >= len;
            }
            touches_start_.push_back(at_start);
            touches_end_.push_back(at_end);
            for (int nb : complex.neighbors(s)) {
                if (!seen[static_cast<std::size_t>(nb)]) {
                    seen[static_cast<std::size_t>(nb)] = 1;
                    queue.push_back(nb);
                }
            }
        }
        adj_.assign(sites_.size(), {});
        for (std::size_t id = 0; id < sites_.size(); ++id) {
            const int s = sites_[id];
            for (int e : complex.site_edges[static_cast<std::size_t>(s)]) {
                const DelaunayEdge& ed = complex.edges[static_cast<std::size_t>(e)];
                const int t = ed.other(s);
                const int tid = local_of_[static_cast<std::size_t>(t)];
                if (tid < 0 || t < s) continue;
                const VoronoiPiece& pc = ed.piece;
                if (detail::segment_meets_box(rect.to_local(pc.origin), rect.direction_to_local(pc.direction), pc.t_min,
                                              pc.t_max, box)) {
                    adj_[id].push_back(tid);
                    adj_[static_cast<std::size_t>(tid)].push_back(static_cast<int>(id));
                }
            }
        }
    }

    const Rect& rect() const { return rect_; }
    Axis axis() const { return axis_; }
    /// Site indices (into the complex) of cells meeting the rectangle.
    const std::vector<int>& sites() const { return sites_; }
    bool touches_start(std::size_t local) const { return touches_start_[local]; }
    bool touches_end(std::size_t local) const { return touches_end_[local]; }
    const std::vector<int>& adjacent(std::size_t local) const { return adj_[local]; }

    /// True iff cells of the given color contain a connected set inside the closed
    /// rectangle meeting both designated sides.
    bool crosses(std::span<const Color> colors, Color color, CrossingWitness* witness = nullptr) const {
        const std::size_t m = sites_.size();
        detail::UnionFind uf(m + 2);
        const int start = static_cast<int>(m), end = static_cast<int>(m + 1);
        for (std::size_t id = 0; id < m; ++id) {
            if (colors[static_cast<std::size_t>(sites_[id])] != color) continue;
            if (touches_start_[id]) uf.unite(static_cast<int>(id), start);
            if (touches_end_[id]) uf.unite(static_cast<int>(id), end);
            for (int t : adj_[id])
                if (colors[static_cast<std::size_t>(sites_[static_cast<std::size_t>(t)])] == color) uf.unite(static_cast<int>(id), t);
        }
        const bool ok = uf.find(start) == uf.find(end);
        if (ok && witness) *witness = path(colors, color);
        return ok;
    }

    /// With black iff u < p: the smallest u at which a black crossing appears. A black
    /// crossing exists at p iff p > the returned value (infinity when impossible).
    double black_threshold(std::span<const double> uniforms) const {
        return sweep(uniforms, false);
    }
    /// With white iff u >= p: a white crossing exists at p iff p <= the returned value
    /// (minus infinity when impossible).
    double white_threshold(std::span<const double> uniforms) const {
        return -sweep(uniforms, true);
    }

  private:
    std::vector<Vec2> local_cell(int s, const VoronoiComplex& complex, const Box& box) const {
        const Vec2 z = rect_.to_local(complex.sites[static_cast<std::size_t>(s)]);
        std::vector<Vec2> poly = to_polygon(box).vertices;
        for (int nb : complex.neighbors(s)) {
            const Vec2 w = rect_.to_local(complex.sites[static_cast<std::size_t>(nb)]);
            poly = detail::clip_halfplane(poly, (z + w) * 0.5, w - z);
            if (poly.empty()) break;
        }
        return poly;
    }

    // Adds sites in increasing order of key until the two sides connect.
    double sweep(std::span<const double> uniforms, bool descending) const {
        const std::size_t m = sites_.size();
        std::vector<std::pair<double, int>> order;
        order.reserve(m);
        for (std::size_t id = 0; id < m; ++id) {
            const double u = uniforms[static_cast<std::size_t>(sites_[id])];
            order.emplace_back(descending ? -u : u, static_cast<int>(id));
        }
        std::sort(order.begin(), order.end());
        detail::UnionFind uf(m + 2);
        std::vector<char> on(m, 0);
        const int start = static_cast<int>(m), end = static_cast<int>(m + 1);
        for (const auto& [key, id] : order) {
            on[static_cast<std::size_t>(id)] = 1;
            if (touches_start_[static_cast<std::size_t>(id)]) uf.unite(id, start);
            if (touches_end_[static_cast<std::size_t>(id)]) uf.unite(id, end);
            for (int t : adj_[static_cast<std::size_t>(id)])
                if (on[static_cast<std::size_t>(t)]) uf.unite(id, t);
            if (uf.find(start) == uf.find(end)) return key;
        }
        return kInf;
    }

    CrossingWitness path(std::span<const Color> colors, Color color) const {
        const std::size_t m = sites_.size();
        std::vector<int> prev(m, -2);
        std::deque<int> queue;
        for (std::size_t id = 0; id < m; ++id) {
            if (touches_start_[id] && colors[static_cast<std::size_t>(sites_[id])] == color) {
                prev[id] = -1;
                queue.push_back(static_cast<int>(id));
            }
        }
        while (!queue.empty()) {
            const int id = queue.front();
            queue.pop_front();
            if (touches_end_[static_cast<std::size_t>(id)]) {
                CrossingWitness w;
                for (int k = id; k >= 0; k = prev[static_cast<std::size_t>(k)]) w.sites.push_back(sites_[static_cast<std::size_t>(k)]);
                std::reverse(w.sites.begin(), w.sites.end());
                return w;
            }
            for (int t : adj_[static_cast<std::size_t>(id)]) {
                if (prev[static_cast<std::size_t>(t)] == -2 && colors[static_cast<std::size_t>(sites_[static_cast<std::size_t>(t)])] == color) {
                    prev[static_cast<std::size_t>(t)] = id;
                    queue.push_back(t);
                }
            }
        }
        throw InternalError("crossing component without a path");
    }

    Rect rect_;
    Axis axis_;
    std::vector<int> sites_;
    std::vector<int> local_of_;
    std::vector<char> touches_start_, touches_end_;
    std::vector<std::vector<int>> adj_;
};

/// cross(R) for one color of a marked configuration, with the Euclidean coloring of
/// `complex` (built from config.points). The window must contain R dilated by `margin`.
inline bool cross(const Rect& rect, const MarkedConfiguration& config, Color color, const VoronoiComplex& complex,
                  CrossingWitness* witness = nullptr, double margin = 0.0) {
    if (config.points.empty()) throw DegenerateInput("the coloring of an empty configuration is undefined");
    if (complex.sites.size() != config.points.size()) throw DomainError("complex does not match the configuration");
    detail::check_margin(config.window, rect, margin);
    return CrossingGeometry(rect, complex).crosses(config.colors, color, witness);
}

// ---------------------------------------------------------------------------
// Subdivision of a long crossing into shorter ones

/// Rectangles inside R, each twice as long as wide, such that crossings of all of them
/// (each along its own long direction) force a crossing of R: horizontal pieces H_k of
/// size 2a x a along the midline, linked by vertical pieces V_k of size a x 2a that
/// cross the overlap squares H_k n H_{k+1}.
inline std::vector<Rect> subdivide_crossing(const Rect& r) {
    r.validate();
    const Axis ax = r.crossing_axis();
    const double len = ax == Axis::horizontal ? r.width : r.height;
    const double wid = ax == Axis::horizontal ? r.height : r.width;
    const int k = std::max(1, static_cast<int>(std::ceil(2.0 * len / wid - 2.0 - 1e-12)));
    const double a = len / (k + 2);
    const double y0 = wid / 2 - a / 2;
    std::vector<Rect> out;
    // Builds a rectangle from coordinates in the (along, across) frame of R.
    auto make = [&](double s0, double t0, double ls, double lt, Axis along) {
        Rect q;
        q.angle = r.angle;
        if (ax == Axis::horizontal) {
            q.corner = r.to_world({s0, t0});
            q.width = ls;
            q.height = lt;
            q.axis = along;
        } else {
            q.corner = r.to_world({t0, s0});
            q.width = lt;
            q.height = ls;
            q.axis = perpendicular(along);
        }
        return q;
    };
    for (int i = 0; i <= k; ++i) out.push_back(make(i * a, y0, 2 * a, a, Axis::horizontal));
    for (int i = 0; i < k; ++i) out.push_back(make((i + 1) * a, y0 - a / 2, a, 2 * a, Axis::vertical));
    return out;
}

// ---------------------------------------------------------------------------
// Clusters

/// The same-color component of `start` under cell adjacency.
inline std::vector<int> cluster(const MarkedConfiguration& config, const VoronoiComplex& complex, Color color, int start) {
    complex.check_site(start);
    if (config.colors.at(static_cast<std::size_t>(start)) != color) throw DomainError("start site has the other color");
    std::vector<char> seen(config.points.size(), 0);
    std::vector<int> out{start}, stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
        const int s = stack.back();
        stack.pop_back();
        for (int nb : complex.neighbors(s)) {
            if (seen[static_cast<std::size_t>(nb)] || config.colors[static_cast<std::size_t>(nb)] != color) continue;
            seen[static_cast<std::size_t>(nb)] = 1;
            out.push_back(nb);
            stack.push_back(nb);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Component label per site (-1 for sites of the other color); labels are the
/// smallest site index of each component.
inline std::vector<int> cluster_labels(const MarkedConfiguration& config, const VoronoiComplex& complex, Color color) {
    std::vector<int> label(config.points.size(), -1);
    for (int s = 0; s < static_cast<int>(config.points.size()); ++s) {
        if (label[static_cast<std::size_t>(s)] >= 0 || config.colors[static_cast<std::size_t>(s)] != color) continue;
        for (int t : cluster(config, complex, color, s)) label[static_cast<std::size_t>(t)] = s;
    }
    return label;
}

// ---------------------------------------------------------------------------
// The local event

/// Base regions supported by local(A, delta): boxes and Euclidean disks.
using LocalRegion = std::variant<Box, Disk>;

inline constexpr int kLocalDivisor = 1000;

/// The grid of pitch delta / divisor anchored at the origin, restricted to the squares
/// contained in A_delta. A_delta is convex, so a square lies inside iff its corners do,
/// and the squares of each column form one contiguous run.
class LocalGrid {
  public:
    LocalGrid(const LocalRegion& a, double delta, int divisor = kLocalDivisor) : region_(a), delta_(delta) {
        if (!(delta > 0)) throw DomainError("local event needs delta > 0");
        if (divisor < 1) throw DomainError("grid divisor must be positive");
        h_ = delta / divisor;
        const Box bb = dilated_bounds();
        i0_ = static_cast<std::int64_t>(std::floor(bb.xmin / h_)) - 1;
        const std::int64_t i1 = static_cast<std::int64_t>(std::ceil(bb.xmax / h_)) + 1;
        count_ = 0;
        for (std::int64_t i = i0_; i <= i1; ++i) {
            const double x0 = static_cast<double>(i) * h_, x1 = static_cast<double>(i + 1) * h_;
            const auto r0 = column_range(x0), r1 = column_range(x1);
            std::int64_t jlo = 1, jhi = 0;
            if (r0 && r1) {
                const double ylo = std::max(r0->first, r1->first), yhi = std::min(r0->second, r1->second);
                jlo = static_cast<std::int64_t>(std::ceil(ylo / h_));
                jhi = static_cast<std::int64_t>(std::floor(yhi / h_)) - 1;
                // Guard the rounding of the two divisions.
                while (jlo <= jhi && static_cast<double>(jlo) * h_ < ylo) ++jlo;
                while (jlo <= jhi && static_cast<double>(jhi + 1) * h_ > yhi) --jhi;
            }
            jlo_.push_back(jlo);
            jhi_.push_back(jhi);
            prefix_.push_back(count_);
            if (jhi >= jlo) count_ += jhi - jlo + 1;
        }
        prefix_.push_back(count_);
        if (count_ == 0) throw DegenerateInput("no grid square fits inside A_delta; enlarge A or delta");
    }

    double pitch() const { return h_; }
    double delta() const { return delta_; }
    const LocalRegion& region() const { return region_; }
    std::int64_t square_count() const { return count_; }
    std::int64_t first_column() const { return i0_; }
    std::int64_t column_count() const { return static_cast<std::int64_t>(jlo_.size()); }
    /// Inclusive row range of column i (empty when lo > hi).
    std::pair<std::int64_t, std::int64_t> rows(std::int64_t i) const {
        const std::int64_t c = i - i0_;
        if (c < 0 || c >= column_count()) return {1, 0};
        return {jlo_[static_cast<std::size_t>(c)], jhi_[static_cast<std::size_t>(c)]};
    }
    bool contains_square(std::int64_t i, std::int64_t j) const {
        const auto [lo, hi] = rows(i);
        return j >= lo && j <= hi;
    }
    std::pair<std::int64_t, std::int64_t> square_of(Vec2 p) const {
        return {static_cast<std::int64_t>(std::floor(p.x / h_)), static_cast<std::int64_t>(std::floor(p.y / h_))};
    }
    Box square_box(std::int64_t i, std::int64_t j) const {
        return {static_cast<double>(i) * h_, static_cast<double>(i + 1) * h_, static_cast<double>(j) * h_,
                static_cast<double>(j + 1) * h_};
    }
    /// The k-th square of the grid in column-major order.
    std::pair<std::int64_t, std::int64_t> square_at(std::int64_t k) const {
        const auto it = std::upper_bound(prefix_.begin(), prefix_.end(), k);
        const std::size_t c = static_cast<std::size_t>(it - prefix_.begin()) - 1;
        return {i0_ + static_cast<std::int64_t>(c), jlo_[c] + (k - prefix_[c])};
    }
    /// Linear index of a square of the grid.
    std::int64_t index_of(std::int64_t i, std::int64_t j) const {
        const std::size_t c = static_cast<std::size_t>(i - i0_);
        return prefix_[c] + (j - jlo_[c]);
    }

    /// True iff every square holds at least one of the points.
    bool covered_by(std::span<const Vec2> points) const {
        if (static_cast<std::int64_t>(points.size()) < count_) return false;
        std::vector<bool> hit(static_cast<std::size_t>(count_), false);
        std::int64_t filled = 0;
        for (const Vec2& p : points) {
            const auto [i, j] = square_of(p);
            // A point on a grid line belongs to both closed squares.
            for (std::int64_t di = -1; di <= 0; ++di)
                for (std::int64_t dj = -1; dj <= 0; ++dj) {
                    const std::int64_t ii = i + di, jj = j + dj;
                    if ((di < 0 && static_cast<double>(i) * h_ != p.x) || (dj < 0 && static_cast<double>(j) * h_ != p.y)) continue;
                    if (!contains_square(ii, jj)) continue;
                    const auto k = static_cast<std::size_t>(index_of(ii, jj));
                    if (!hit[k]) {
                        hit[k] = true;
                        ++filled;
                    }
                }
        }
        return filled == count_;
    }

    /// Largest Euclidean norm over A_delta.
    double dilated_max_norm() const {
        if (const auto* b = std::get_if<Box>(&region_)) return b->farthest_from({0, 0}).norm() + delta_;
        const Disk& d = std::get<Disk>(region_);
        return d.center.norm() + d.radius + delta_;
    }

  private:
    Box dilated_bounds() const {
        if (const auto* b = std::get_if<Box>(&region_)) return b->dilated(delta_);
        const Disk& d = std::get<Disk>(region_);
        return Disk{d.center, d.radius + delta_}.bounding_box();
    }

    // y-extent of A_delta on the vertical line at x.
    std::optional<std::pair<double, double>> column_range(double x) const {
        if (const auto* b = std::get_if<Box>(&region_)) {
            double half = delta_;
            if (x < b->xmin || x > b->xmax) {
                const double dx = x < b->xmin ? b->xmin - x : x - b->xmax;
                if (dx > delta_) return std::nullopt;
                half = std::sqrt((delta_ - dx) * (delta_ + dx));
            }
            return std::pair{b->ymin - half, b->ymax + half};
        }
        const Disk& d = std::get<Disk>(region_);
        const double r = d.radius + delta_, dx = std::fabs(x - d.center.x);
        if (dx > r) return std::nullopt;
        const double half = std::sqrt((r - dx) * (r + dx));
        return std::pair{d.center.y - half, d.center.y + half};
    }

    LocalRegion region_;
    double delta_;
    double h_ = 0.0;
    std::int64_t i0_ = 0;
    std::int64_t count_ = 0;
    std::vector<std::int64_t> jlo_, jhi_, prefix_;
};

namespace detail {

inline void check_local_in_disk(const LocalGrid& g, Metric metric) {
    if (metric == Metric::hyperbolic && !(g.dilated_max_norm() < 1.0 - kBoundaryEps))
        throw DomainError("A_delta is not contained in the unit disk");
}

}  // namespace detail

/// local(A, delta): every square of the pitch delta/divisor grid lying inside A_delta
/// holds at least one point.
inline bool local_event(const LocalRegion& a, double delta, std::span<const Vec2> points, int divisor = kLocalDivisor,
                        Metric metric = Metric::hyperbolic) {
    const LocalGrid grid(a, delta, divisor);
    detail::check_local_in_disk(grid, metric);
    return grid.covered_by(points);
}

/// Probe points of a grid of the given pitch covering A (anchored at A's lower-left).
inline std::vector<Vec2> probe_grid(const LocalRegion& a, double pitch) {
    std::vector<Vec2> out;
    const Box b = std::holds_alternative<Box>(a) ? std::get<Box>(a) : std::get<Disk>(a).bounding_box();
    const auto nx = static_cast<std::int64_t>(std::floor(b.width() / pitch + 1e-9));
    const auto ny = static_cast<std::int64_t>(std::floor(b.height() / pitch + 1e-9));
    for (std::int64_t i = 0; i <= nx; ++i)
        for (std::int64_t j = 0; j <= ny; ++j) {
            const Vec2 u{b.xmin + static_cast<double>(i) * pitch, b.ymin + static_cast<double>(j) * pitch};
            if (const auto* d = std::get_if<Disk>(&a); d && !d->contains(u)) continue;
            out.push_back(u);
        }
    return out;
}

struct LocalityReport {
    std::size_t probes = 0;
    std::size_t euclid_violations = 0;  ///< probes with no point within Euclidean distance delta
    std::size_t hyp_violations = 0;     ///< probes whose hyperbolic nearest point is delta or farther away
    bool ok() const { return euclid_violations == 0 && hyp_violations == 0; }
};

/// Checks on a probe grid over A that the Euclidean and the hyperbolic nearest point of
/// every probe lie within Euclidean distance delta.
inline LocalityReport locality_check(const LocalRegion& a, double delta, std::span<const Vec2> points,
                                     double probe_pitch = 0.0) {
    if (probe_pitch <= 0) probe_pitch = delta / 100;
    LocalityReport rep;
    if (points.empty()) {
        rep.probes = probe_grid(a, probe_pitch).size();
        rep.euclid_violations = rep.hyp_violations = rep.probes;
        return rep;
    }
    const SiteIndex index(points);
    for (const Vec2& u : probe_grid(a, probe_pitch)) {
        ++rep.probes;
        const Vec2 e = index.sites()[static_cast<std::size_t>(index.nearest(u, Metric::euclidean))];
        const Vec2 h = index.sites()[static_cast<std::size_t>(index.nearest(u, Metric::hyperbolic))];
        rep.euclid_violations += !((e - u).norm() < delta);
        rep.hyp_violations += !((h - u).norm() < delta);
    }
    return rep;
}

/// Boolean form: false only on a counterexample to the hyperbolic locality property.
inline bool locality_radius_check(const LocalRegion& a, double delta, const MarkedConfiguration& config,
                                  double probe_pitch = 0.0) {
    return locality_check(a, delta, config.points, probe_pitch).hyp_violations == 0;
}

// ---------------------------------------------------------------------------
// Hyperbolic Poisson process resolved on the local grid

namespace detail {

// Two-point Gauss-Legendre rule in each direction.
inline double square_mass(const Box& b, double lambda) {
    const double g = 0.5 / std::numbers::sqrt3;
    const double cx = (b.xmin + b.xmax) / 2, cy = (b.ymin + b.ymax) / 2, w = b.width();
    double s = 0;
    for (double dx : {-g, g})
        for (double dy : {-g, g}) s += hyp_density({cx + dx * w, cy + dy * w});
    return lambda * s * 0.25 * b.area();
}

}  // namespace detail

/// The hyperbolic Poisson process of intensity lambda, sampled square by square on a
/// LocalGrid. Which squares of the grid are empty is drawn up front (independent
/// Bernoulli(exp(-mass)) indicators, drawn by thinning a Binomial from the largest
/// emptiness probability); the points of any square are generated lazily and
/// reproducibly from the seed. Reaches intensities where the full point set would not
/// fit in memory.
class LatticePoissonField {
  public:
    LatticePoissonField(const LocalGrid& grid, double lambda, std::uint64_t seed) : grid_(&grid), lambda_(lambda), seed_(seed) {
        if (!(lambda > 0)) throw DomainError("lattice field needs a positive intensity");
        // Emptiness is most likely where the density is lowest, at the square nearest o.
        double min_mass = kInf;
        for (std::int64_t c = 0; c < grid.column_count(); ++c) {
            const std::int64_t i = grid.first_column() + c;
            const auto [lo, hi] = grid.rows(i);
            if (lo > hi) continue;
            const std::int64_t j = std::clamp<std::int64_t>(0, lo, hi);
            min_mass = std::min(min_mass, mass(i, j));
            min_mass = std::min(min_mass, mass(i, j > lo ? j - 1 : j));
        }
        q_max_ = std::exp(-min_mass * (1 - 1e-9));
        Rng rng(derive_seed(seed, 0xE4E4));
        std::binomial_distribution<std::int64_t> bin(grid.square_count(), std::min(1.0, q_max_));
        const std::int64_t k = bin(rng);
        std::unordered_set<std::int64_t> picked;
        while (static_cast<std::int64_t>(picked.size()) < k) {
            const auto idx = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(grid.square_count()));
            if (!picked.insert(idx).second) continue;
            const auto [i, j] = grid.square_at(idx);
            if (rng.uniform() * q_max_ < std::exp(-mass(i, j))) empty_.insert(key(i, j));
        }
    }

    const LocalGrid& grid() const { return *grid_; }
    double lambda() const { return lambda_; }

    double mass(std::int64_t i, std::int64_t j) const { return detail::square_mass(grid_->square_box(i, j), lambda_); }

    /// local(A, delta) for this sample.
    bool event() const { return empty_.empty(); }
    std::size_t empty_squares() const { return empty_.size(); }

    /// Exact probability of the event, a product over the squares.
    double analytic_probability() const { return local_event_probability(*grid_, lambda_); }

    static double local_event_probability(const LocalGrid& grid, double lambda) {
        double log_p = 0;
        for (std::int64_t c = 0; c < grid.column_count(); ++c) {
            const std::int64_t i = grid.first_column() + c;
            const auto [lo, hi] = grid.rows(i);
            for (std::int64_t j = lo; j <= hi; ++j) log_p += std::log1p(-std::exp(-detail::square_mass(grid.square_box(i, j), lambda)));
        }
        return std::exp(log_p);
    }

    /// The points in square (i, j); any square of the plane inside the unit disk may be asked for.
    std::vector<Vec2> points_in(std::int64_t i, std::int64_t j) const {
        const Box b = grid_->square_box(i, j);
        std::vector<Vec2> pts;
        if (b.farthest_from({0, 0}).norm() >= 1.0 - kBoundaryEps) return pts;
        const double m = mass(i, j);
        Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
        std::uint64_t n;
        if (grid_->contains_square(i, j)) {
            if (empty_.count(key(i, j))) return pts;
            n = conditional_poisson(m, rng.uniform());
        } else {
            n = rng.poisson(m);
        }
        const double fmax = hyp_density(b.farthest_from({0, 0}));
        while (pts.size() < n) {
            const Vec2 u{rng.uniform(b.xmin, b.xmax), rng.uniform(b.ymin, b.ymax)};
            if (rng.uniform() * fmax < hyp_density(u)) pts.push_back(u);
        }
        return pts;
    }

    /// Points in all squares meeting the box.
    std::vector<Vec2> points_in(const Box& region) const {
        const auto [i0, j0] = grid_->square_of({region.xmin, region.ymin});
        const auto [i1, j1] = grid_->square_of({region.xmax, region.ymax});
        std::vector<Vec2> out;
        for (std::int64_t i = i0; i <= i1; ++i)
            for (std::int64_t j = j0; j <= j1; ++j) {
                const auto p = points_in(i, j);
                out.insert(out.end(), p.begin(), p.end());
            }
        return out;
    }

    /// Probe checks of the locality properties on this sample. Each probe visits the squares
    /// of the surrounding block (`block` rings) in order of their distance to it; the
    /// hyperbolic nearest point found so far is certified globally once it is closer than any
    /// point in an unvisited square, or outside the block, can be.
    LocalityReport locality_check(double probe_pitch = 0.0, int block = 2) const {
        const double delta = grid_->delta();
        if (probe_pitch <= 0) probe_pitch = delta / 100;
        if (block < 1) throw DomainError("locality check needs at least one ring of squares");
        LocalityReport rep;
        const double h = grid_->pitch();
        std::unordered_map<std::uint64_t, std::vector<Vec2>> cache;
        // Probes farther apart than the block never share squares; caching only pays off below that.
        const bool use_cache = probe_pitch < (2 * block + 1) * h;
        std::vector<Vec2> scratch;
        auto cell = [&](std::int64_t i, std::int64_t j) -> const std::vector<Vec2>& {
            if (!use_cache) return scratch = points_in(i, j);
            auto it = cache.find(key(i, j));
            if (it == cache.end()) it = cache.emplace(key(i, j), points_in(i, j)).first;
            return it->second;
        };
        struct Near {
            double dist;
            std::int64_t i, j;
        };
        std::vector<Near> order;
        for (const Vec2& u : probe_grid(grid_->region(), probe_pitch)) {
            ++rep.probes;
            const auto [ci, cj] = grid_->square_of(u);
            const Box own = grid_->square_box(ci, cj);
            order.clear();
            for (std::int64_t i = ci - block; i <= ci + block; ++i)
                for (std::int64_t j = cj - block; j <= cj + block; ++j) {
                    const Box q = grid_->square_box(i, j);
                    const double dx = std::max({q.xmin - u.x, 0.0, u.x - q.xmax});
                    const double dy = std::max({q.ymin - u.y, 0.0, u.y - q.ymax});
                    order.push_back({std::sqrt(dx * dx + dy * dy), i, j});
                }
            std::sort(order.begin(), order.end(), [](const Near& x, const Near& y) { return x.dist < y.dist; });
            // Everything outside the block is at least this far from u.
            const double beyond = block * h + std::min({u.x - own.xmin, own.xmax - u.x, u.y - own.ymin, own.ymax - u.y});
            const double scale = std::sqrt(one_minus_norm2(u));
            // |u - z| >= D implies d_H(u, z) >= 2 asinh(D / sqrt(1 - |u|^2)).
            auto hyp_floor = [&](double d) { return 2 * std::asinh(d / scale); };
            double best_e2 = kInf, best_key = kInf, best_h = kInf;
            Vec2 arg_h;
            bool certified = false;
            for (std::size_t k = 0; k <= order.size(); ++k) {
                const double next = k < order.size() ? std::min(order[k].dist, beyond) : beyond;
                if (best_h < hyp_floor(next)) {
                    certified = true;
                    break;
                }
                if (k == order.size()) break;
                bool improved = false;
                for (const Vec2& z : cell(order[k].i, order[k].j)) {
                    const double d2 = (z - u).norm2();
                    best_e2 = std::min(best_e2, d2);
                    // Hyperbolic nearest by the monotone key |z - u|^2 / (1 - |z|^2).
                    const double kz = d2 / one_minus_norm2(z);
                    if (kz < best_key) {
                        best_key = kz;
                        arg_h = z;
                        improved = true;
                    }
                }
                if (improved) best_h = detail::hyp_distance(u, arg_h);
            }
            rep.euclid_violations += !(std::sqrt(best_e2) < delta);
            rep.hyp_violations += !(certified && (arg_h - u).norm() < delta);
        }
        return rep;
    }

  private:
    static std::uint64_t key(std::int64_t i, std::int64_t j) {
        return (static_cast<std::uint64_t>(i) << 32) ^ (static_cast<std::uint64_t>(j) & 0xffffffffULL);
    }

    // Inverse CDF of Poisson(m) conditioned on being at least 1.
    static std::uint64_t conditional_poisson(double m, double u) {
        const double norm = -std::expm1(-m);
        double term = std::exp(-m), cdf = 0;
        for (std::uint64_t k = 1;; ++k) {
            term *= m / static_cast<double>(k);
            cdf += term / norm;
            if (u < cdf || k > 10000) return k;
        }
    }

    const LocalGrid* grid_;
    double lambda_;
    std::uint64_t seed_;
    double q_max_ = 0;
    std::unordered_set<std::uint64_t> empty_;
};

}  // namespace hvp
