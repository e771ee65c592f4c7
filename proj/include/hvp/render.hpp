#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "delaunay.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "percolation.hpp"
#include "pointprocess.hpp"
#include "tiling.hpp"
#include "vec2.hpp"
#include "voronoi.hpp"

namespace hvp {

struct RenderOptions {
    int size = 800;                       ///< canvas width and height in px
    std::string black_fill = "#add8e6";   ///< black cells are drawn light blue
    std::string white_fill = "#ffffff";
    std::string edge_color = "#303030";
    std::string overlay_color = "#d62728";
    std::string highlight_fill = "#ffd27f";
    Metric boundary = Metric::hyperbolic;  ///< geodesic arcs or straight segments for cell edges
    double stroke = 0.6;
    double overlay_stroke = 1.5;
    bool clip = true;  ///< keep all geometry inside the unit disk
    bool sites = false;
    int clip_polygon_sides = 256;

    void validate() const {
        if (size < 64) throw DomainError("canvas size must be at least 64 px");
        static const std::regex hex("#[0-9a-fA-F]{6}");
        for (const std::string* c : {&black_fill, &white_fill, &edge_color, &overlay_color, &highlight_fill})
            if (!std::regex_match(*c, hex)) throw DomainError("invalid color '" + *c + "' (expected #rrggbb)");
        if (!(stroke > 0 && overlay_stroke > 0)) throw DomainError("stroke widths must be positive");
        if (clip_polygon_sides < 8) throw DomainError("clip polygon needs at least 8 sides");
    }
};

// ---------------------------------------------------------------------------
// Scene: paths of straight and circular pieces in disk coordinates

struct PathSegment {
    Vec2 to;
    bool arc = false;
    Vec2 center;         ///< carrier circle, for arcs
    double radius = 0.0;
    bool ccw = true;     ///< direction of travel around the carrier
    bool large = false;  ///< arc longer than half the carrier
};

struct ScenePath {
    std::string kind;  ///< cell, tile, overlay, ...
    Vec2 start;
    std::vector<PathSegment> segments;
    bool closed = true;
    std::string fill = "none";
    std::string stroke = "#000000";
    double stroke_width = 1.0;
};

struct SceneDot {
    Vec2 at;
    double radius = 0.005;
    std::string fill = "#000000";
};

struct Scene {
    int size = 800;
    bool clip = true;
    std::vector<ScenePath> paths;
    std::vector<SceneDot> dots;
};

namespace detail {

// Circle orthogonal to the unit circle through u and v (either may be ideal); empty
// when u, v and o are collinear, in which case the geodesic is a straight segment.
inline std::optional<Circle> geodesic_carrier(Vec2 u, Vec2 v) {
    const double det = cross(u, v);
    const double bu = (1 + u.norm2()) / 2, bv = (1 + v.norm2()) / 2;
    if (std::fabs(det) <= 1e-12 * std::max(1e-300, u.norm() * v.norm()) || std::fabs(det) < 1e-14) return std::nullopt;
    const Vec2 c{(bu * v.y - bv * u.y) / det, (u.x * bv - v.x * bu) / det};
    const double r2 = c.norm2() - 1;
    if (!(r2 > 0)) return std::nullopt;
    const double r = std::sqrt(r2);
    // Very large carriers are visually straight and numerically fragile.
    if (r > 1e6) return std::nullopt;
    return Circle{c, r, std::nullopt};
}

inline PathSegment geodesic_segment(Vec2 from, Vec2 to) {
    PathSegment s;
    s.to = to;
    if (const auto c = geodesic_carrier(from, to)) {
        s.arc = true;
        s.center = c->center;
        s.radius = c->radius;
        s.ccw = cross(from - c->center, to - c->center) > 0;
        s.large = false;
    }
    return s;
}

// Counter-clockwise arc of the unit circle from a to b.
inline PathSegment ideal_segment(Vec2 a, Vec2 b) {
    PathSegment s;
    s.to = b;
    s.arc = true;
    s.center = {0, 0};
    s.radius = 1.0;
    s.ccw = true;
    double sweep = std::atan2(b.y, b.x) - std::atan2(a.y, a.x);
    while (sweep < 0) sweep += 2 * std::numbers::pi;
    s.large = sweep > std::numbers::pi;
    return s;
}

inline Vec2 klein_to_poincare(Vec2 k) {
    const double s = std::sqrt(std::max(0.0, 1 - k.norm2()));
    return k / (1 + s);
}

// Chord of segment a-b inside the closed unit disk, as parameters in [0, 1].
inline std::optional<std::pair<double, double>> chord_in_disk(Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double A = d.norm2(), B = 2 * dot(a, d), C = a.norm2() - 1;
    if (A == 0) return C <= 0 ? std::optional{std::pair{0.0, 1.0}} : std::nullopt;
    const double disc = B * B - 4 * A * C;
    if (disc <= 0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t0 = std::max(0.0, (-B - sq) / (2 * A)), t1 = std::min(1.0, (-B + sq) / (2 * A));
    if (t0 >= t1) return std::nullopt;
    return std::pair{t0, t1};
}

inline Vec2 unit(Vec2 v) { return v / v.norm(); }

inline PathSegment line_to(Vec2 to) {
    PathSegment s;
    s.to = to;
    return s;
}

}  // namespace detail

/// The hyperbolic Voronoi cell of a site as a closed chain of geodesic arcs and ideal
/// arcs of the unit circle. In the frame where the site is o, the cell is an intersection
/// of Klein-model half-planes {k : k . w_hat <= |w|}, one per neighbor w.
inline ScenePath hyperbolic_cell_path(int site, const VoronoiComplex& complex) {
    const Vec2 z = complex.sites[static_cast<std::size_t>(site)];
    const DiskIsometry t = DiskIsometry::to_origin(PoincarePoint(z));
    std::vector<Vec2> poly{{-2, -2}, {2, -2}, {2, 2}, {-2, 2}};
    for (int nb : complex.neighbors(site)) {
        const Vec2 w = t.apply(complex.sites[static_cast<std::size_t>(nb)]);
        const Vec2 n = detail::unit(w);
        poly = detail::clip_halfplane(poly, n * w.norm(), n);
    }
    ScenePath path;
    path.kind = "cell";
    // Pieces of the polygon boundary inside the disk, in counter-clockwise order.
    std::vector<std::pair<Vec2, Vec2>> pieces;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2 a = poly[k], b = poly[(k + 1) % poly.size()];
        if (const auto ch = detail::chord_in_disk(a, b)) pieces.emplace_back(a + (b - a) * ch->first, a + (b - a) * ch->second);
    }
    auto back = [&](Vec2 k) {
        const Vec2 p = detail::klein_to_poincare(k);
        return p.norm() >= 1 - 1e-15 ? t.apply_inverse(detail::unit(p)) : t.apply_inverse(p);
    };
    if (pieces.empty()) {
        // The cell is the whole plane: the boundary is the unit circle.
        path.start = {1, 0};
        path.segments.push_back(detail::ideal_segment({1, 0}, {-1, 0}));
        path.segments.push_back(detail::ideal_segment({-1, 0}, {1, 0}));
        path.segments.back().to = path.start;
        return path;
    }
    const std::size_t m = pieces.size();
    path.start = back(pieces[0].first);
    Vec2 cur = path.start;
    for (std::size_t k = 0; k < m; ++k) {
        const Vec2 e = back(pieces[k].second);
        if ((pieces[k].second - pieces[k].first).norm() > 1e-15) {
            path.segments.push_back(detail::geodesic_segment(cur, e));
            cur = e;
        }
        const Vec2 next_k = pieces[(k + 1) % m].first;
        const Vec2 next = k + 1 == m ? path.start : back(next_k);
        if ((pieces[k].second - next_k).norm() > 1e-12) {
            path.segments.push_back(detail::ideal_segment(cur, next));
            cur = next;
        }
    }
    if (path.segments.empty() || (cur - path.start).norm() > 1e-9)
        path.segments.push_back(detail::geodesic_segment(cur, path.start));
    path.segments.back().to = path.start;
    return path;
}

inline std::vector<Vec2> regular_polygon(int sides, double radius = 1.0) {
    std::vector<Vec2> out;
    for (int k = 0; k < sides; ++k) {
        const double a = 2 * std::numbers::pi * k / sides;
        out.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    return out;
}

inline ScenePath polygon_path(const std::vector<Vec2>& poly, std::string kind) {
    ScenePath p;
    p.kind = std::move(kind);
    if (poly.empty()) return p;
    p.start = poly[0];
    for (std::size_t k = 1; k < poly.size(); ++k) p.segments.push_back(detail::line_to(poly[k]));
    p.segments.push_back(detail::line_to(poly[0]));
    return p;
}

inline ScenePath rect_path(const Rect& r, const RenderOptions& o) {
    const auto c = r.corners();
    ScenePath p = polygon_path(std::vector<Vec2>(c.begin(), c.end()), "overlay");
    p.stroke = o.overlay_color;
    p.stroke_width = o.overlay_stroke;
    return p;
}

inline ScenePath polyline_path(const std::vector<Vec2>& pts, const RenderOptions& o) {
    ScenePath p;
    p.kind = "witness";
    p.closed = false;
    if (pts.empty()) return p;
    p.start = pts[0];
    for (std::size_t k = 1; k < pts.size(); ++k) p.segments.push_back(detail::line_to(pts[k]));
    p.stroke = o.overlay_color;
    p.stroke_width = o.overlay_stroke;
    return p;
}

struct Overlay {
    std::vector<Rect> rects;
    std::vector<std::vector<Vec2>> polylines;
};

/// Voronoi coloring of a configuration. Hyperbolic boundaries are geodesic arcs; the
/// Euclidean boundaries are straight, with cells clipped to a polygon inscribed in the
/// unit circle (clip on) or to the viewport square.
inline Scene voronoi_scene(const MarkedConfiguration& config, const VoronoiComplex& complex, const RenderOptions& o,
                           const Overlay& overlay = {}) {
    o.validate();
    if (complex.sites.size() != config.points.size() || config.colors.size() != config.points.size())
        throw DomainError("complex does not match the configuration");
    for (std::size_t i = 0; i < config.points.size(); ++i)
        if (!(complex.sites[i] == config.points[i])) throw DomainError("complex does not match the configuration");
    Scene s;
    s.size = o.size;
    s.clip = o.clip;
    const std::vector<Vec2> clip_poly =
        o.clip ? regular_polygon(o.clip_polygon_sides) : std::vector<Vec2>{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    for (std::size_t i = 0; i < config.points.size(); ++i) {
        ScenePath p;
        if (o.boundary == Metric::hyperbolic) {
            if (!(config.points[i].norm() < 1)) throw DomainError("hyperbolic rendering needs sites inside the disk");
            p = hyperbolic_cell_path(static_cast<int>(i), complex);
        } else {
            const auto poly = cell_clip(static_cast<int>(i), clip_poly, complex);
            if (poly.size() < 3) continue;
            p = polygon_path(poly, "cell");
        }
        p.fill = config.colors[i] == Color::black ? o.black_fill : o.white_fill;
        p.stroke = o.edge_color;
        p.stroke_width = o.stroke;
        s.paths.push_back(std::move(p));
        if (o.sites) s.dots.push_back({config.points[i], 0.004, "#000000"});
    }
    for (const Rect& r : overlay.rects) s.paths.push_back(rect_path(r, o));
    for (const auto& pl : overlay.polylines) s.paths.push_back(polyline_path(pl, o));
    return s;
}

/// Tiles as geodesic triangles, optionally highlighted, with rectangle overlays.
inline Scene tiling_scene(const Tiling& tiling, const std::vector<int>& highlighted, const RenderOptions& o,
                          const Overlay& overlay = {}) {
    o.validate();
    Scene s;
    s.size = o.size;
    s.clip = o.clip;
    for (const TriangleTile& t : tiling.tiles) {
        ScenePath p;
        p.kind = "tile";
        p.start = t.vertices[0];
        for (int k = 1; k <= 3; ++k)
            p.segments.push_back(detail::geodesic_segment(t.vertices[static_cast<std::size_t>(k - 1)], t.vertices[static_cast<std::size_t>(k % 3)]));
        p.segments.back().to = p.start;
        const bool hl = std::find(highlighted.begin(), highlighted.end(), t.id) != highlighted.end();
        p.fill = hl ? o.highlight_fill : o.white_fill;
        p.stroke = o.edge_color;
        p.stroke_width = o.stroke;
        s.paths.push_back(std::move(p));
    }
    for (const Rect& r : overlay.rects) s.paths.push_back(rect_path(r, o));
    for (const auto& pl : overlay.polylines) s.paths.push_back(polyline_path(pl, o));
    return s;
}

/// A rectangle with the pieces of its subdivision into shorter crossings.
inline Scene subdivision_scene(const Rect& r, const RenderOptions& o) {
    o.validate();
    Scene s;
    s.size = o.size;
    s.clip = o.clip;
    ScenePath outer = rect_path(r, o);
    outer.stroke = o.edge_color;
    s.paths.push_back(outer);
    for (const Rect& piece : subdivide_crossing(r)) {
        ScenePath p = rect_path(piece, o);
        p.kind = "piece";
        s.paths.push_back(p);
    }
    return s;
}

// ---------------------------------------------------------------------------
// SVG

namespace detail {

inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    std::string s = buf;
    return s == "-0.000000" ? "0.000000" : s;
}

}  // namespace detail

/// Disk coordinates to canvas coordinates: [-1, 1]^2 onto [0, size]^2, y pointing down.
inline Vec2 to_canvas(Vec2 u, int size) { return {(u.x + 1) / 2 * size, (1 - u.y) / 2 * size}; }

inline std::string path_data(const ScenePath& p, int size) {
    auto pt = [&](Vec2 u) {
        const Vec2 c = to_canvas(u, size);
        return detail::num(c.x) + " " + detail::num(c.y);
    };
    std::string d = "M " + pt(p.start);
    for (const PathSegment& s : p.segments) {
        if (s.arc) {
            const std::string r = detail::num(s.radius * size / 2);
            // The canvas flips y, so a counter-clockwise turn in the disk has sweep flag 0.
            d += " A " + r + " " + r + " 0 " + (s.large ? "1" : "0") + " " + (s.ccw ? "0" : "1") + " " + pt(s.to);
        } else {
            d += " L " + pt(s.to);
        }
    }
    if (p.closed) d += " Z";
    return d;
}

inline std::string to_svg(const Scene& s, const std::string& title = "") {
    const std::string sz = std::to_string(s.size);
    const std::string half = detail::num(s.size / 2.0);
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + sz + "\" height=\"" + sz + "\" viewBox=\"0 0 " + sz +
           " " + sz + "\">\n";
    if (!title.empty()) out += "<title>" + title + "</title>\n";
    out += "<defs><clipPath id=\"disk\"><circle cx=\"" + half + "\" cy=\"" + half + "\" r=\"" + half + "\"/></clipPath></defs>\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + sz + "\" height=\"" + sz + "\" fill=\"#ffffff\"/>\n";
    out += s.clip ? "<g clip-path=\"url(#disk)\">\n" : "<g>\n";
    for (const ScenePath& p : s.paths) {
        out += "<path class=\"" + p.kind + "\" d=\"" + path_data(p, s.size) + "\" fill=\"" + p.fill + "\" stroke=\"" + p.stroke +
               "\" stroke-width=\"" + detail::num(p.stroke_width) + "\"/>\n";
    }
    for (const SceneDot& d : s.dots) {
        const Vec2 c = to_canvas(d.at, s.size);
        out += "<circle cx=\"" + detail::num(c.x) + "\" cy=\"" + detail::num(c.y) + "\" r=\"" + detail::num(d.radius * s.size / 2) +
               "\" fill=\"" + d.fill + "\"/>\n";
    }
    out += "</g>\n";
    out += "<circle class=\"boundary\" cx=\"" + half + "\" cy=\"" + half + "\" r=\"" + half + "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.000000\"/>\n";
    out += "</svg>\n";
    return out;
}

inline std::string render_voronoi(const MarkedConfiguration& config, const VoronoiComplex& complex, const RenderOptions& o,
                                  const Overlay& overlay = {}) {
    return to_svg(voronoi_scene(config, complex, o, overlay));
}

inline std::string render_tiling(const Tiling& tiling, const std::vector<int>& highlighted, const std::vector<Rect>& rects,
                                 const RenderOptions& o) {
    return to_svg(tiling_scene(tiling, highlighted, o, Overlay{rects, {}}));
}

/// File name convention for figures: <experiment-id>_<figure-kind>.svg.
inline std::string figure_name(const std::string& experiment_id, const std::string& kind) {
    static const std::regex ok("[A-Za-z0-9._-]+");
    if (!std::regex_match(experiment_id, ok) || !std::regex_match(kind, ok))
        throw DomainError("figure names use letters, digits, '.', '_' and '-' only");
    return experiment_id + "_" + kind + ".svg";
}

}  // namespace hvp
