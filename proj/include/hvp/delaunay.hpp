#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "pointprocess.hpp"
#include "predicates.hpp"
#include "vec2.hpp"

namespace hvp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A Voronoi edge as the parametric set {origin + t * direction : t in [t_min, t_max]};
/// segments use [0, 1], rays [0, inf) and full bisector lines (-inf, inf).
struct VoronoiPiece {
    Vec2 origin;
    Vec2 direction;
    double t_min = 0.0;
    double t_max = 1.0;

    Vec2 at(double t) const { return origin + direction * t; }
    bool bounded() const { return std::isfinite(t_min) && std::isfinite(t_max); }
};

/// Delaunay edge {a, b} with a < b. Faces are indices into VoronoiComplex::faces, or -1
/// when that side is outside the convex hull.
struct DelaunayEdge {
    int a = -1;
    int b = -1;
    int left_face = -1;   ///< face to the left of a -> b
    int right_face = -1;  ///< face to the right of a -> b
    VoronoiPiece piece;

    int other(int s) const { return s == a ? b : a; }
    bool on_hull() const { return left_face < 0 || right_face < 0; }
};

/// Delaunay triangulation of a site set together with the dual Voronoi geometry
/// under the Euclidean metric.
struct VoronoiComplex {
    Metric metric = Metric::euclidean;
    std::vector<Vec2> sites;
    std::vector<std::array<int, 3>> faces;  ///< counter-clockwise site triples
    std::vector<Circle> circumcircles;      ///< per face; centers are the Voronoi vertices
    std::vector<DelaunayEdge> edges;
    std::vector<std::vector<int>> site_edges;  ///< incident edge ids, counter-clockwise by neighbor direction
    std::vector<int> hull;                     ///< counter-clockwise convex hull (sorted order when collinear)

    std::size_t size() const { return sites.size(); }

    std::vector<int> neighbors(int s) const {
        std::vector<int> out;
        out.reserve(site_edges.at(static_cast<std::size_t>(s)).size());
        for (int e : site_edges[static_cast<std::size_t>(s)]) out.push_back(edges[static_cast<std::size_t>(e)].other(s));
        return out;
    }

    std::optional<int> find_edge(int s, int t) const {
        for (int e : site_edges.at(static_cast<std::size_t>(s)))
            if (edges[static_cast<std::size_t>(e)].other(s) == t) return e;
        return std::nullopt;
    }

    std::vector<Vec2> voronoi_vertices() const {
        std::vector<Vec2> out;
        out.reserve(circumcircles.size());
        for (const Circle& c : circumcircles) out.push_back(c.center);
        return out;
    }

    void check_site(int s) const {
        if (s < 0 || static_cast<std::size_t>(s) >= sites.size())
            throw DomainError("unknown site index " + std::to_string(s));
    }
};

namespace detail {

class DelaunayBuilder {
  public:
    static constexpr int kGhost = -1;

    explicit DelaunayBuilder(std::span<const Vec2> pts) : pts_(pts.begin(), pts.end()) {}

    /// Returns false when all points are collinear. The insertion order defaults to a
    /// spatial sort; the result does not depend on it.
    bool build(std::vector<int> order = {}) {
        if (order.empty()) order = spatial_order();
        const int a = order[0], b = order[1];
        int c = -1;
        std::size_t c_pos = 0;
        for (std::size_t k = 2; k < order.size(); ++k) {
            if (predicates::orient2d(pts_[a], pts_[b], pts_[order[k]]) != 0) {
                c = order[k];
                c_pos = k;
                break;
            }
        }
        if (c < 0) return false;
        init_triangle(a, b, c);
        for (std::size_t k = 2; k < order.size(); ++k)
            if (k != c_pos) insert(order[k]);
        return true;
    }

    VoronoiComplex extract() const;

  private:
    struct Tri {
        std::array<int, 3> v{};
        std::array<int, 3> nb{-1, -1, -1};
        bool alive = true;
    };

    std::vector<int> spatial_order() const {
        const std::size_t n = pts_.size();
        Box bb{kInf, -kInf, kInf, -kInf};
        for (const Vec2& p : pts_) {
            bb.xmin = std::min(bb.xmin, p.x);
            bb.xmax = std::max(bb.xmax, p.x);
            bb.ymin = std::min(bb.ymin, p.y);
            bb.ymax = std::max(bb.ymax, p.y);
        }
        const int g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n) / 4.0)));
        const double w = std::max(bb.width(), 1e-300), h = std::max(bb.height(), 1e-300);
        std::vector<std::int64_t> key(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int cx = std::min(g - 1, static_cast<int>((pts_[i].x - bb.xmin) / w * g));
            const int cy = std::min(g - 1, static_cast<int>((pts_[i].y - bb.ymin) / h * g));
            const int col = (cy % 2 == 0) ? cx : g - 1 - cx;
            key[i] = static_cast<std::int64_t>(cy) * g + col;
        }
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return key[x] < key[y]; });
        return order;
    }

    int new_tri(int a, int b, int c) {
        // Ghost vertex always sits in slot 2.
        if (a == kGhost) { a = b; b = c; c = kGhost; }
        else if (b == kGhost) { b = a; a = c; c = kGhost; }
        Tri t;
        t.v = {a, b, c};
        if (!free_.empty()) {
            const int id = free_.back();
            free_.pop_back();
            tris_[id] = t;
            return id;
        }
        tris_.push_back(t);
        mark_.push_back(0);
        return static_cast<int>(tris_.size()) - 1;
    }

    static int slot_opposite_edge(const Tri& t, int u, int w) {
        for (int i = 0; i < 3; ++i) {
            const int x = t.v[(i + 1) % 3], y = t.v[(i + 2) % 3];
            if ((x == u && y == w) || (x == w && y == u)) return i;
        }
        return -1;
    }

    void init_triangle(int a, int b, int c) {
        if (predicates::orient2d(pts_[a], pts_[b], pts_[c]) < 0) std::swap(b, c);
        const int f = new_tri(a, b, c);
        const int g0 = new_tri(c, b, kGhost), g1 = new_tri(a, c, kGhost), g2 = new_tri(b, a, kGhost);
        const std::array<int, 4> all{f, g0, g1, g2};
        for (int t : all) {
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[t].v[(i + 1) % 3], w = tris_[t].v[(i + 2) % 3];
                for (int s : all) {
                    if (s == t) continue;
                    const int j = slot_opposite_edge(tris_[s], u, w);
                    if (j >= 0) { tris_[t].nb[i] = s; break; }
                }
            }
        }
        last_ = f;
    }

    bool is_ghost(const Tri& t) const { return t.v[2] == kGhost; }

    bool lex_less(int i, int j) const { return pts_[i] < pts_[j]; }

    bool in_conflict(int t, int p) const {
        const Tri& T = tris_[t];
        if (is_ghost(T)) {
            const int a = T.v[0], b = T.v[1];
            const int o = predicates::orient2d(pts_[a], pts_[b], pts_[p]);
            if (o != 0) return o > 0;
            const int lo = lex_less(a, b) ? a : b, hi = lex_less(a, b) ? b : a;
            return lex_less(lo, p) && lex_less(p, hi);
        }
        return predicates::incircle_perturbed(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]], pts_[p], T.v[0], T.v[1],
                                              T.v[2], p);
    }

    int locate(int p) {
        int t = last_;
        if (!tris_[t].alive) {
            for (t = 0; !tris_[t].alive; ++t) {}
        }
        if (is_ghost(tris_[t])) t = tris_[t].nb[2];
        std::size_t steps = 0;
        for (;;) {
            const Tri& T = tris_[t];
            if (is_ghost(T)) return t;
            walk_state_ = walk_state_ * 6364136223846793005ULL + 1442695040888963407ULL;
            const int start = static_cast<int>((walk_state_ >> 33) % 3);
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const int i = (start + k) % 3;
                if (predicates::orient2d(pts_[T.v[(i + 1) % 3]], pts_[T.v[(i + 2) % 3]], pts_[p]) < 0) {
                    next = T.nb[i];
                    break;
                }
            }
            if (next < 0) return t;
            t = next;
            if (++steps > 4 * tris_.size() + 16) throw InternalError("point location did not terminate");
        }
    }

    void insert(int p) {
        const int seed = locate(p);
        if (!is_ghost(tris_[seed])) {
            for (int v : tris_[seed].v)
                if (pts_[v] == pts_[p]) throw DegenerateInput("duplicate site");
        }
        if (!in_conflict(seed, p)) throw InternalError("located triangle is not in conflict");

        ++epoch_;
        cavity_.clear();
        boundary_.clear();
        stack_.clear();
        stack_.push_back(seed);
        mark_[seed] = epoch_;
        while (!stack_.empty()) {
            const int t = stack_.back();
            stack_.pop_back();
            cavity_.push_back(t);
            for (int i = 0; i < 3; ++i) {
                const int n = tris_[t].nb[i];
                if (mark_[n] == epoch_) continue;
                if (in_conflict(n, p)) {
                    mark_[n] = epoch_;
                    stack_.push_back(n);
                } else {
                    boundary_.push_back({tris_[t].v[(i + 1) % 3], tris_[t].v[(i + 2) % 3], n});
                }
            }
        }

        created_.clear();
        for (const BoundaryEdge& e : boundary_) {
            const int nt = new_tri(e.u, e.w, p);
            tris_[nt].nb[slot_opposite_edge(tris_[nt], e.u, e.w)] = e.outside;
            Tri& out = tris_[e.outside];
            out.nb[slot_opposite_edge(out, e.u, e.w)] = nt;
            created_.push_back({e.u, e.w, nt});
        }
        for (const Created& c : created_) {
            for (const Created& d : created_) {
                if (d.w == c.u) tris_[c.tri].nb[slot_opposite_edge(tris_[c.tri], p, c.u)] = d.tri;
                if (d.u == c.w) tris_[c.tri].nb[slot_opposite_edge(tris_[c.tri], p, c.w)] = d.tri;
            }
        }
        for (int t : cavity_) {
            tris_[t].alive = false;
            free_.push_back(t);
        }
        // Freed slots may be reused by the next insertion; clear stale marks.
        for (int t : cavity_) mark_[t] = 0;
        last_ = created_.front().tri;
    }

    struct BoundaryEdge {
        int u, w, outside;
    };
    struct Created {
        int u, w, tri;
    };

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<int> mark_;
    std::vector<int> free_;
    std::vector<int> cavity_, stack_;
    std::vector<BoundaryEdge> boundary_;
    std::vector<Created> created_;
    int epoch_ = 0;
    int last_ = 0;
    std::uint64_t walk_state_ = 0x853c49e6748fea9bULL;
};

inline Vec2 hull_outward_normal(Vec2 a, Vec2 b, bool outside_on_right) {
    const Vec2 d = b - a;
    return outside_on_right ? Vec2{d.y, -d.x} : Vec2{-d.y, d.x};
}

inline void sort_site_edges(VoronoiComplex& c) {
    c.site_edges.assign(c.sites.size(), {});
    for (std::size_t e = 0; e < c.edges.size(); ++e) {
        c.site_edges[static_cast<std::size_t>(c.edges[e].a)].push_back(static_cast<int>(e));
        c.site_edges[static_cast<std::size_t>(c.edges[e].b)].push_back(static_cast<int>(e));
    }
    for (std::size_t s = 0; s < c.sites.size(); ++s) {
        auto& list = c.site_edges[s];
        std::vector<std::pair<double, int>> keyed;
        keyed.reserve(list.size());
        for (int e : list) {
            const Vec2 d = c.sites[static_cast<std::size_t>(c.edges[static_cast<std::size_t>(e)].other(static_cast<int>(s)))] - c.sites[s];
            keyed.emplace_back(std::atan2(d.y, d.x), e);
        }
        std::sort(keyed.begin(), keyed.end());
        for (std::size_t k = 0; k < keyed.size(); ++k) list[k] = keyed[k].second;
    }
}

inline VoronoiComplex DelaunayBuilder::extract() const {
    VoronoiComplex c;
    c.sites = pts_;
    std::vector<int> face_of(tris_.size(), -1);
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        const Tri& T = tris_[t];
        if (!T.alive || is_ghost(T)) continue;
        face_of[t] = static_cast<int>(c.faces.size());
        c.faces.push_back(T.v);
        const Vec2 cc = circumcenter(pts_[T.v[0]], pts_[T.v[1]], pts_[T.v[2]]);
        c.circumcircles.push_back({cc, (cc - pts_[T.v[0]]).norm(), std::nullopt});
    }
    std::vector<int> hull_next(pts_.size(), -1);
    for (std::size_t t = 0; t < tris_.size(); ++t) {
        const Tri& T = tris_[t];
        if (!T.alive) continue;
        if (is_ghost(T)) hull_next[static_cast<std::size_t>(T.v[1])] = T.v[0];
        for (int i = 0; i < 3; ++i) {
            const int u = T.v[(i + 1) % 3], w = T.v[(i + 2) % 3];
            if (u == kGhost || w == kGhost || u > w) continue;
            // T lies to the left of u -> w; the neighbor lies to the right.
            DelaunayEdge e;
            e.a = u;
            e.b = w;
            e.left_face = face_of[t];
            e.right_face = face_of[static_cast<std::size_t>(T.nb[i])];
            if (e.left_face >= 0 && e.right_face >= 0) {
                const Vec2 o = c.circumcircles[static_cast<std::size_t>(e.right_face)].center;
                e.piece = {o, c.circumcircles[static_cast<std::size_t>(e.left_face)].center - o, 0.0, 1.0};
            } else if (e.left_face >= 0) {
                e.piece = {c.circumcircles[static_cast<std::size_t>(e.left_face)].center,
                           hull_outward_normal(pts_[u], pts_[w], true), 0.0, kInf};
            } else {
                e.piece = {c.circumcircles[static_cast<std::size_t>(e.right_face)].center,
                           hull_outward_normal(pts_[u], pts_[w], false), 0.0, kInf};
            }
            c.edges.push_back(e);
        }
        // Edges are emitted once from the side where u < w; the twin has u > w.
    }
    int start = -1;
    for (std::size_t s = 0; s < hull_next.size(); ++s)
        if (hull_next[s] >= 0 && (start < 0 || pts_[s] < pts_[static_cast<std::size_t>(start)])) start = static_cast<int>(s);
    for (int s = start; s >= 0;) {
        c.hull.push_back(s);
        s = hull_next[static_cast<std::size_t>(s)];
        if (s == start) break;
    }
    sort_site_edges(c);
    return c;
}

inline void check_distinct(std::span<const Vec2> sites) {
    std::vector<Vec2> sorted(sites.begin(), sites.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw DegenerateInput("duplicate site");
}

// Voronoi structure of fewer than three or collinear sites: parallel bisector lines.
inline VoronoiComplex collinear_complex(std::span<const Vec2> sites) {
    VoronoiComplex c;
    c.sites.assign(sites.begin(), sites.end());
    std::vector<int> order(sites.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return sites[i] < sites[j]; });
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        DelaunayEdge e;
        e.a = std::min(order[k], order[k + 1]);
        e.b = std::max(order[k], order[k + 1]);
        const Vec2 pa = sites[e.a], pb = sites[e.b];
        e.piece = {(pa + pb) * 0.5, perp(pb - pa), -kInf, kInf};
        c.edges.push_back(e);
    }
    c.hull = order;
    sort_site_edges(c);
    return c;
}

}  // namespace detail

/// Delaunay triangulation with exact predicates; cocircular ties resolved by the
/// lowest-index perturbation rule. Needs at least three sites, not all collinear.
inline VoronoiComplex delaunay(std::span<const Vec2> sites) {
    if (sites.size() < 3) throw DegenerateInput("Delaunay triangulation needs at least 3 sites");
    detail::check_distinct(sites);
    detail::DelaunayBuilder builder(sites);
    if (!builder.build()) throw DegenerateInput("all sites are collinear");
    return builder.extract();
}

/// Voronoi structure of any nonempty set of distinct sites, including the
/// degenerate one-site, two-site and collinear cases that have no triangulation.
inline VoronoiComplex voronoi_complex(std::span<const Vec2> sites) {
    if (sites.empty()) throw DegenerateInput("empty site set");
    detail::check_distinct(sites);
    if (sites.size() >= 3) {
        detail::DelaunayBuilder builder(sites);
        if (builder.build()) return builder.extract();
    }
    return detail::collinear_complex(sites);
}

}  // namespace hvp
