#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
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

// ---------------------------------------------------------------------------
// The (7,7,7) triangulation

struct TriangleTile {
    int id = 0;
    std::array<Vec2, 3> vertices;
    Vec2 center;
    /// Maps this tile onto the base tile, vertex k onto base vertex k.
    DiskIsometry to_base;
    /// Sides reflected in, from the base tile; side k is opposite vertex k.
    std::string word;
    int depth() const { return static_cast<int>(word.size()); }
};

namespace detail {

// Points equal within a tolerance, found through a grid of cells twice the tolerance.
class PointDictionary {
  public:
    explicit PointDictionary(double tol) : tol_(tol) {}
    int find(Vec2 p) const {
        const auto [i, j] = cell(p);
        for (std::int64_t di = -1; di <= 1; ++di)
            for (std::int64_t dj = -1; dj <= 1; ++dj) {
                const auto it = map_.find({i + di, j + dj});
                if (it == map_.end()) continue;
                for (int id : it->second)
                    if ((points_[static_cast<std::size_t>(id)] - p).norm() <= tol_) return id;
            }
        return -1;
    }
    int insert(Vec2 p) {
        const int id = static_cast<int>(points_.size());
        points_.push_back(p);
        map_[cell(p)].push_back(id);
        return id;
    }
    int find_or_insert(Vec2 p) {
        const int id = find(p);
        return id >= 0 ? id : insert(p);
    }
    const std::vector<Vec2>& points() const { return points_; }

  private:
    std::pair<std::int64_t, std::int64_t> cell(Vec2 p) const {
        return {static_cast<std::int64_t>(std::floor(p.x / (2 * tol_))), static_cast<std::int64_t>(std::floor(p.y / (2 * tol_)))};
    }
    double tol_;
    std::vector<Vec2> points_;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<int>> map_;
};

// Reflection in the geodesic through u and v, computed in the frame where u is the
// origin so that nearly straight geodesics lose no precision.
inline Vec2 reflect_in_geodesic(Vec2 u, Vec2 v, Vec2 z) {
    const Complex a{u.x, u.y};
    auto to = [&](Complex x) { return (x - a) / (1.0 - std::conj(a) * x); };
    auto from = [&](Complex y) { return (y + a) / (1.0 + std::conj(a) * y); };
    const Complex w = to({v.x, v.y});
    const Complex rot = (w / std::abs(w)) * (w / std::abs(w));
    const Complex r = from(rot * std::conj(to({z.x, z.y})));
    return {r.real(), r.imag()};
}

// The isometry sending `center` to the origin and vertex 0 to the positive real axis.
inline DiskIsometry centering_isometry(Vec2 center, Vec2 v0, bool reflective) {
    const DiskIsometry base(PoincarePoint(center), 0.0, reflective);
    const Vec2 w = base.apply(v0);
    return {PoincarePoint(center), -std::atan2(w.y, w.x), reflective};
}

}  // namespace detail

inline constexpr double kTileMatchTolerance = 1e-9;

/// All tiles of the (7,7,7) triangulation up to a word length, with their vertices and
/// the graph in which tiles are adjacent when they share at least a point.
struct Tiling {
    int depth = 0;
    std::vector<TriangleTile> tiles;
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> tile_vertices;
    std::vector<std::vector<int>> vertex_tiles;
    std::vector<std::vector<int>> adjacency;

    std::size_t size() const { return tiles.size(); }
    /// Tiles whose every vertex has all seven incident triangles in the patch: any
    /// triangle around a vertex is at most three reflections away.
    bool interior(int tile) const { return tiles[static_cast<std::size_t>(tile)].depth() <= depth - 3; }
    bool interior_vertex(int v) const {
        for (int t : vertex_tiles[static_cast<std::size_t>(v)])
            if (interior(t)) return true;
        return false;
    }
};

inline Tiling generate_tiling(int depth) {
    if (depth < 0) throw DomainError("tiling depth must be nonnegative");
    Tiling til;
    til.depth = depth;
    const auto base = triangle_777();
    TriangleTile t0;
    for (int k = 0; k < 3; ++k) t0.vertices[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)].vec();
    t0.center = {0, 0};
    t0.to_base = DiskIsometry::identity();
    til.tiles.push_back(t0);
    detail::PointDictionary centers(kTileMatchTolerance);
    centers.insert(t0.center);
    std::size_t frontier_begin = 0;
    for (int d = 0; d < depth; ++d) {
        const std::size_t frontier_end = til.tiles.size();
        for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
            for (int side = 0; side < 3; ++side) {
                const TriangleTile& t = til.tiles[i];
                const Vec2 va = t.vertices[static_cast<std::size_t>((side + 1) % 3)];
                const Vec2 vb = t.vertices[static_cast<std::size_t>((side + 2) % 3)];
                const Vec2 c = detail::reflect_in_geodesic(va, vb, t.center);
                if (centers.find(c) >= 0) continue;
                TriangleTile n;
                n.id = static_cast<int>(til.tiles.size());
                for (int k = 0; k < 3; ++k) n.vertices[static_cast<std::size_t>(k)] = k == side ? detail::reflect_in_geodesic(va, vb, t.vertices[static_cast<std::size_t>(k)]) : t.vertices[static_cast<std::size_t>(k)];
                n.center = c;
                n.word = t.word + static_cast<char>('a' + side);
                n.to_base = detail::centering_isometry(c, n.vertices[0], n.word.size() % 2 == 1);
                centers.insert(c);
                til.tiles.push_back(std::move(n));
            }
        }
        frontier_begin = frontier_end;
    }
    detail::PointDictionary verts(kTileMatchTolerance);
    for (const TriangleTile& t : til.tiles) {
        std::array<int, 3> ids{};
        for (int k = 0; k < 3; ++k) ids[static_cast<std::size_t>(k)] = verts.find_or_insert(t.vertices[static_cast<std::size_t>(k)]);
        til.tile_vertices.push_back(ids);
    }
    til.vertices = verts.points();
    til.vertex_tiles.assign(til.vertices.size(), {});
    for (std::size_t t = 0; t < til.tiles.size(); ++t)
        for (int v : til.tile_vertices[t]) til.vertex_tiles[static_cast<std::size_t>(v)].push_back(static_cast<int>(t));
    til.adjacency.assign(til.tiles.size(), {});
    for (std::size_t t = 0; t < til.tiles.size(); ++t) {
        auto& adj = til.adjacency[t];
        for (int v : til.tile_vertices[t])
            for (int u : til.vertex_tiles[static_cast<std::size_t>(v)])
                if (u != static_cast<int>(t)) adj.push_back(u);
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    return til;
}

/// True iff u lies in the closed geodesic triangle.
inline bool tile_contains(const TriangleTile& t, Vec2 u, double tol = 1e-12) {
    // In the base frame the sides are arcs of one congruent triangle; test there.
    const Vec2 w = t.to_base.apply(u);
    const auto base = triangle_777();
    for (int side = 0; side < 3; ++side) {
        const Vec2 a = base[static_cast<std::size_t>((side + 1) % 3)].vec(), b = base[static_cast<std::size_t>((side + 2) % 3)].vec();
        const Geodesic g = geodesic_through(a, b);
        // The origin is inside; u is inside iff it is on the same side of the carrier.
        const double so = g.radius * g.radius - g.center.norm2();
        const double su = g.radius * g.radius - (w - g.center).norm2();
        if (so * su < 0 && std::fabs(su) > tol) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Six rectangles around the base tile

struct SixRectangleParams {
    double apothem = 0.40;  ///< distance from o to the inner long sides
    double width = 0.06;    ///< short side
    double length = 0.66;   ///< long side
    double rotation = 0.0;  ///< angle of the first rectangle's outward normal
    double r = 0.75;
    double delta = 0.05;
};

struct ClosedEventGeometry {
    SixRectangleParams params;
    std::array<Rect, 6> rects;
    double r = 0.0;
    double delta = 0.0;
    /// Hyperbolic radius of B(o, r + delta).
    double rho = 0.0;
};

namespace detail {

inline std::vector<Vec2> rect_polygon(const Rect& r) { return r.corners(); }

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double t = std::clamp(dot(p - a, d) / d.norm2(), 0.0, 1.0);
    return (a + d * t - p).norm();
}

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a), d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

// Distance between two convex polygons; zero when they meet.
inline double polygon_distance(const std::vector<Vec2>& p, const std::vector<Vec2>& q) {
    auto inside = [](const std::vector<Vec2>& poly, Vec2 u) {
        for (std::size_t k = 0; k < poly.size(); ++k)
            if (cross(poly[(k + 1) % poly.size()] - poly[k], u - poly[k]) < 0) return false;
        return true;
    };
    if (inside(p, q[0]) || inside(q, p[0])) return 0.0;
    double best = kInf;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) {
            const Vec2 a = p[i], b = p[(i + 1) % p.size()], c = q[j], d = q[(j + 1) % q.size()];
            if (segments_intersect(a, b, c, d)) return 0.0;
            best = std::min({best, point_segment_distance(a, c, d), point_segment_distance(c, a, b)});
        }
    return best;
}

// Intersection of the infinite strips spanned by two rectangles' long directions.
inline std::optional<std::array<Vec2, 4>> strip_parallelogram(const Rect& a, const Rect& b) {
    const Vec2 ta = rotate({1, 0}, a.angle), tb = rotate({1, 0}, b.angle);
    if (std::fabs(cross(ta, tb)) < 1e-12) return std::nullopt;
    // Lines y_a = const in a's frame and y_b = const in b's frame.
    auto meet = [&](double ya, double yb) {
        const Vec2 pa = a.to_world({0, ya}), pb = b.to_world({0, yb});
        const double s = cross(pb - pa, tb) / cross(ta, tb);
        return pa + ta * s;
    };
    return std::array<Vec2, 4>{meet(0, 0), meet(a.height, 0), meet(a.height, b.height), meet(0, b.height)};
}

inline bool in_rect(const Rect& r, Vec2 p, double tol = 1e-12) {
    const Vec2 l = r.to_local(p);
    return l.x >= -tol && l.x <= r.width + tol && l.y >= -tol && l.y <= r.height + tol;
}

}  // namespace detail

/// Consecutive rectangles overlap in a region spanning each of them between its long
/// sides, so long crossings of all six concatenate into a closed curve around o.
inline bool validate_separation(const ClosedEventGeometry& g) {
    for (int i = 0; i < 6; ++i) {
        const Rect& a = g.rects[static_cast<std::size_t>(i)];
        const Rect& b = g.rects[static_cast<std::size_t>((i + 1) % 6)];
        const auto par = detail::strip_parallelogram(a, b);
        if (!par) return false;
        for (const Vec2& v : *par)
            if (!detail::in_rect(a, v) || !detail::in_rect(b, v)) return false;
    }
    // The chain winds once around the origin.
    double turn = 0;
    for (int i = 0; i < 6; ++i) {
        const Vec2 c0 = g.rects[static_cast<std::size_t>(i)].center(), c1 = g.rects[static_cast<std::size_t>((i + 1) % 6)].center();
        turn += std::atan2(cross(c0, c1), dot(c0, c1));
    }
    return std::fabs(std::fabs(turn) - 2 * std::numbers::pi) < 1e-9;
}

inline std::vector<Vec2> base_tile_hull() {
    std::vector<Vec2> out;
    for (const auto& v : triangle_777()) out.push_back(v.vec());
    return out;
}

/// Checks every constraint; throws DomainError naming the first one violated.
inline void validate_geometry(const ClosedEventGeometry& g) {
    if (!(g.r > 0 && g.delta > 0 && g.r + g.delta < 1)) throw DomainError("need r > 0, delta > 0 and r + delta < 1");
    // The base tile lies inside the Euclidean triangle of its vertices (its sides bow inwards).
    const std::vector<Vec2> hull = base_tile_hull();
    for (const Rect& rc : g.rects) {
        if (rc.width == rc.height) throw DomainError("rectangle is a square");
        for (const Vec2& c : rc.corners())
            if (!(c.norm() <= g.r)) throw DomainError("rectangle is not inside B(o, r)");
        if (!(detail::polygon_distance(detail::rect_polygon(rc), hull) > g.delta))
            throw DomainError("rectangle is within delta of the base tile");
    }
    if (!validate_separation(g)) throw DomainError("no separating annulus");
}

inline ClosedEventGeometry make_geometry(const SixRectangleParams& p) {
    ClosedEventGeometry g;
    g.params = p;
    g.r = p.r;
    g.delta = p.delta;
    g.rho = hyp_radius_of(p.r + p.delta);
    for (int i = 0; i < 6; ++i) {
        const double th = p.rotation + i * std::numbers::pi / 3;
        const Vec2 n{std::cos(th), std::sin(th)};
        const Vec2 t = perp(n);
        Rect rc;
        // Local x runs along t, local y from the outer long side inwards.
        rc.angle = th + std::numbers::pi / 2;
        rc.width = p.length;
        rc.height = p.width;
        rc.corner = n * (p.apothem + p.width) - t * (p.length / 2);
        rc.axis = Axis::horizontal;
        g.rects[static_cast<std::size_t>(i)] = rc;
    }
    return g;
}

/// Six congruent rectangles around the base tile with six-fold symmetry; validated.
inline ClosedEventGeometry six_rectangles(const SixRectangleParams& p = {}) {
    ClosedEventGeometry g = make_geometry(p);
    validate_geometry(g);
    return g;
}

// ---------------------------------------------------------------------------
// closed(T)

struct ClosedEventResult {
    bool local = false;
    std::array<bool, 6> crossings{};
    bool value() const {
        return local && std::all_of(crossings.begin(), crossings.end(), [](bool b) { return b; });
    }
};

/// The points moved by the tile's isometry, restricted to B(o, r + delta) of the base frame.
inline std::vector<int> base_frame_subset(const TriangleTile& t, std::span<const Vec2> pts, double radius, std::vector<Vec2>& moved) {
    std::vector<int> idx;
    moved.clear();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 w = t.to_base.apply(pts[i]);
        if (w.norm() < radius) {
            idx.push_back(static_cast<int>(i));
            moved.push_back(w);
        }
    }
    return idx;
}

inline void check_closed_event_window(const TriangleTile& t, const Window& window, double rho) {
    const Circle c = hyp_circle_to_euclid(PoincarePoint(t.center), rho);
    bool ok;
    if (const auto* d = std::get_if<CenteredHypDisk>(&window)) ok = c.center.norm() + c.radius <= d->euclid_radius();
    else ok = std::get<Box>(window).contains(Disk{c.center, c.radius}.bounding_box());
    if (!ok) throw MarginError("sampling window does not cover the dependency disk of the tile");
}

/// closed(T): the six crossings and local(B(o, r), delta) for the configuration moved
/// into the base frame by the tile's isometry.
inline ClosedEventResult closed_event(const TriangleTile& t, const MarkedConfiguration& config, const ClosedEventGeometry& g,
                                      int divisor = kLocalDivisor) {
    check_closed_event_window(t, config.window, g.rho);
    std::vector<Vec2> moved;
    const std::vector<int> idx = base_frame_subset(t, config.points, g.r + g.delta, moved);
    ClosedEventResult res;
    res.local = local_event(Disk{{0, 0}, g.r}, g.delta, moved, divisor);
    if (!res.local) return res;
    // Under local the coloring of B(o, r) only depends on these points.
    const VoronoiComplex vc = voronoi_complex(moved);
    std::vector<Color> colors;
    for (int i : idx) colors.push_back(config.colors[static_cast<std::size_t>(i)]);
    for (int k = 0; k < 6; ++k) res.crossings[static_cast<std::size_t>(k)] = CrossingGeometry(g.rects[static_cast<std::size_t>(k)], vc).crosses(colors, Color::black);
    return res;
}

/// Outcome of the white-path search from the base tile.
struct WhiteEscape {
    bool escaped = false;
    std::size_t start_cells = 0;
    std::size_t explored = 0;
};

/// Searches for a white path of cells from a cell meeting the base tile to a cell that
/// leaves B(o, r). Works on a configuration already in the base frame, restricted to
/// B(o, r + delta) with local(B(o, r), delta) holding. Cells meeting the base tile are
/// found by the nearest sites of a probe grid of the given pitch over the tile.
inline WhiteEscape white_escape(std::span<const Vec2> moved, std::span<const Color> colors, double r, double probe_pitch = 1e-3) {
    WhiteEscape out;
    const VoronoiComplex vc = voronoi_complex(moved);
    const SiteIndex index(moved);
    const auto base = triangle_777();
    TriangleTile t0;
    for (int k = 0; k < 3; ++k) t0.vertices[static_cast<std::size_t>(k)] = base[static_cast<std::size_t>(k)].vec();
    const double er = base[0].norm();
    std::vector<char> seen(moved.size(), 0);
    std::vector<int> stack;
    for (const Vec2& u : probe_grid(Disk{{0, 0}, er}, probe_pitch)) {
        if (!tile_contains(t0, u)) continue;
        const int s = index.nearest(u, Metric::euclidean);
        if (colors[static_cast<std::size_t>(s)] != Color::white || seen[static_cast<std::size_t>(s)]) continue;
        seen[static_cast<std::size_t>(s)] = 1;
        stack.push_back(s);
        ++out.start_cells;
    }
    const Box big{-2, 2, -2, 2};
    while (!stack.empty()) {
        const int s = stack.back();
        stack.pop_back();
        ++out.explored;
        double far = 0;
        for (const Vec2& v : cell_clip(s, big, vc)) far = std::max(far, v.norm());
        if (far > r) {
            out.escaped = true;
            return out;
        }
        for (int nb : vc.neighbors(s)) {
            if (seen[static_cast<std::size_t>(nb)] || colors[static_cast<std::size_t>(nb)] != Color::white) continue;
            seen[static_cast<std::size_t>(nb)] = 1;
            stack.push_back(nb);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dependency radius and k-independent percolation

struct DependencyRadius {
    double rho = 0.0;
    int k = 0;
};

/// rho = hyperbolic radius of B(o, r + delta) and k = number of tiles whose center is
/// within 2 rho of o. Exhaustive when every tile of depth >= D - 2 is farther than
/// 2 rho + circumradius: any tile of larger depth lies beyond one of them.
inline DependencyRadius dependency_radius(const ClosedEventGeometry& g, const Tiling& til) {
    DependencyRadius d;
    d.rho = hyp_radius_of(g.r + g.delta);
    const double rc = triangle_777_circumradius();
    double frontier = kInf;
    for (const TriangleTile& t : til.tiles) {
        const double dist = detail::hyp_distance(Vec2{0, 0}, t.center);
        if (dist < 2 * d.rho) ++d.k;
        if (t.depth() >= til.depth - 2) frontier = std::min(frontier, dist);
    }
    if (!(frontier - rc >= 2 * d.rho)) throw DomainError("tiling depth insufficient for the dependency radius; generate deeper");
    return d;
}

/// Smallest depth whose tiling certifies dependency_radius.
inline Tiling tiling_for_radius(const ClosedEventGeometry& g, int max_depth = 40) {
    for (int depth = 3; depth <= max_depth; ++depth) {
        Tiling t = generate_tiling(depth);
        try {
            dependency_radius(g, t);
            return t;
        } catch (const DomainError&) {
        }
    }
    throw DomainError("dependency radius needs a tiling deeper than the limit");
}

/// ln of d^{-(1 + d^k)}; finite for all k, d >= 1 in double range of the exponent.
inline double log_p1_threshold(double k, double d) {
    if (!(k >= 1 && d >= 1)) throw DomainError("p1 threshold needs k >= 1 and d >= 1");
    return -(1 + std::pow(d, k)) * std::log(d);
}

/// log10 of -ln of the threshold, usable when the threshold underflows.
inline double log10_neg_log_p1_threshold(double k, double d) {
    if (!(k >= 1 && d > 1)) throw DomainError("needs k >= 1 and d > 1");
    const double lk = k * std::log10(d);  // log10 d^k
    return std::log10(std::log(d)) + lk + std::log10(1 + std::pow(10.0, -lk));
}

inline double p1_threshold(double k, double d) { return std::exp(log_p1_threshold(k, d)); }

struct OpenClusters {
    std::vector<int> label;  ///< component label per tile, -1 for closed tiles
    std::vector<std::vector<int>> components;
    std::size_t largest = 0;
    bool largest_touches_boundary = false;
};

/// Open components under tile adjacency. The boundary ring is the set of non-interior tiles.
inline OpenClusters dependent_percolation_run(const Tiling& til, const std::vector<bool>& open) {
    if (open.size() != til.size()) throw DomainError("one state per tile required");
    OpenClusters out;
    out.label.assign(til.size(), -1);
    for (std::size_t t = 0; t < til.size(); ++t) {
        if (!open[t] || out.label[t] >= 0) continue;
        const int lab = static_cast<int>(out.components.size());
        std::vector<int> comp{static_cast<int>(t)};
        out.label[t] = lab;
        for (std::size_t h = 0; h < comp.size(); ++h)
            for (int u : til.adjacency[static_cast<std::size_t>(comp[h])])
                if (open[static_cast<std::size_t>(u)] && out.label[static_cast<std::size_t>(u)] < 0) {
                    out.label[static_cast<std::size_t>(u)] = lab;
                    comp.push_back(u);
                }
        if (comp.size() > out.largest) {
            out.largest = comp.size();
            out.largest_touches_boundary = std::any_of(comp.begin(), comp.end(), [&](int u) { return !til.interior(u); });
        }
        out.components.push_back(std::move(comp));
    }
    return out;
}

/// Synthetic 3-independent field: tile T is open iff some tile of its closed
/// neighborhood has uniform below q, with q set so that a tile with the full 16-tile
/// neighborhood is open with probability p_site. Tiles at graph distance >= 3 have
/// disjoint neighborhoods, hence independent states.
inline std::vector<bool> block_field(const Tiling& til, double p_site, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> u(til.size());
    for (double& x : u) x = rng.uniform();
    const double q = -std::expm1(std::log1p(-p_site) / 16);
    std::vector<bool> open(til.size());
    for (std::size_t t = 0; t < til.size(); ++t) {
        bool o = u[t] < q;
        for (int n : til.adjacency[t]) o = o || u[static_cast<std::size_t>(n)] < q;
        open[t] = o;
    }
    return open;
}

}  // namespace hvp
