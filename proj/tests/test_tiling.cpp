#include <gtest/gtest.h>

#include <cmath>
#include <deque>

#include "hvp/tiling.hpp"

using namespace hvp;

namespace {

const Tiling& patch6() {
    static const Tiling t = generate_tiling(6);
    return t;
}

}  // namespace

TEST(Tiling, DepthZero) {
    const Tiling t = generate_tiling(0);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.vertices.size(), 3u);
    EXPECT_TRUE(t.adjacency[0].empty());
    EXPECT_THROW(generate_tiling(-1), DomainError);
}

TEST(Tiling, DegreesAndVertexValence) {
    const Tiling& t = patch6();
    int interior = 0, interior_vertices = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_LE(t.adjacency[i].size(), 15u);
        if (!t.interior(static_cast<int>(i))) continue;
        ++interior;
        EXPECT_EQ(t.adjacency[i].size(), 15u);
    }
    for (std::size_t v = 0; v < t.vertices.size(); ++v) {
        EXPECT_LE(t.vertex_tiles[v].size(), 7u);
        if (!t.interior_vertex(static_cast<int>(v))) continue;
        ++interior_vertices;
        EXPECT_EQ(t.vertex_tiles[v].size(), 7u);
    }
    EXPECT_GT(interior, 10);
    EXPECT_GT(interior_vertices, 10);
    EXPECT_EQ(generate_tiling(3).adjacency[0].size(), 15u);
}

TEST(Tiling, TilesAreCongruentAndCentered) {
    const Tiling& t = patch6();
    const auto base = triangle_777();
    const double two_pi_7 = 2 * std::numbers::pi / 7;
    for (const TriangleTile& tile : t.tiles) {
        for (int k = 0; k < 3; ++k) {
            const Vec2 w = tile.to_base.apply(tile.vertices[static_cast<std::size_t>(k)]);
            EXPECT_LT(detail::hyp_distance(w, base[static_cast<std::size_t>(k)].vec()), 1e-9);
            const Vec2 v = tile.vertices[static_cast<std::size_t>(k)];
            EXPECT_NEAR(geodesic_angle(v, tile.vertices[static_cast<std::size_t>((k + 1) % 3)], tile.vertices[static_cast<std::size_t>((k + 2) % 3)]),
                        two_pi_7, 1e-8);
        }
        EXPECT_LT(tile.to_base.apply(tile.center).norm(), 1e-9);
    }
}

TEST(Tiling, CoversWithoutOverlap) {
    const Tiling& t = patch6();
    // Points of a hyperbolic disk inside the patch lie in exactly one tile (off the sides).
    double inner = kInf;
    for (const TriangleTile& tile : t.tiles)
        if (!t.interior(tile.id)) inner = std::min(inner, detail::hyp_distance(Vec2{0, 0}, tile.center));
    const double rho = inner - triangle_777_circumradius();
    ASSERT_GT(rho, 0.5);
    Rng rng(9);
    const double er = euclid_radius_of(rho);
    for (int k = 0; k < 3000; ++k) {
        const double rad = er * std::sqrt(rng.uniform()), ang = rng.uniform(0, 2 * std::numbers::pi);
        const Vec2 u{rad * std::cos(ang), rad * std::sin(ang)};
        int count = 0;
        for (const TriangleTile& tile : t.tiles) count += tile_contains(tile, u, 0.0);
        EXPECT_EQ(count, 1);
    }
}

TEST(SixRectangles, DefaultsValidate) {
    const ClosedEventGeometry g = six_rectangles();
    EXPECT_TRUE(validate_separation(g));
    EXPECT_NEAR(g.rho, 2 * std::atanh(0.8), 1e-14);
    EXPECT_NEAR(g.rho, detail::hyp_distance(Vec2{0, 0}, Vec2{0.8, 0}), 1e-12);
    for (int i = 0; i < 6; ++i) {
        const Rect& a = g.rects[static_cast<std::size_t>(i)];
        const Rect& b = g.rects[static_cast<std::size_t>((i + 1) % 6)];
        EXPECT_NEAR(std::remainder(b.angle - a.angle - std::numbers::pi / 3, 2 * std::numbers::pi), 0.0, 1e-12);
        EXPECT_EQ(a.crossing_axis(), Axis::horizontal);
        EXPECT_GT(a.width, a.height);
    }
}

TEST(SixRectangles, NegativeControls) {
    SixRectangleParams p;
    p.length = 0.3;
    try {
        six_rectangles(p);
        FAIL() << "short rectangles accepted";
    } catch (const DomainError& e) {
        EXPECT_STREQ(e.what(), "no separating annulus");
    }
    ClosedEventGeometry g = six_rectangles();
    g.rects[2].corner = g.rects[2].corner * 1.3;
    EXPECT_FALSE(validate_separation(g));
    SixRectangleParams q;
    q.apothem = 0.3;
    EXPECT_THROW(six_rectangles(q), DomainError);
    SixRectangleParams big;
    big.r = 0.5;
    EXPECT_THROW(six_rectangles(big), DomainError);
}

TEST(SixRectangles, RotationInvariance) {
    for (double th : {0.1, 0.7, 1.3, 2.9, -4.0}) {
        SixRectangleParams p;
        p.rotation = th;
        EXPECT_NO_THROW(six_rectangles(p));
    }
}

TEST(ClosedEvent, TrivialCases) {
    const ClosedEventGeometry g = six_rectangles();
    const Tiling t = generate_tiling(0);
    MarkedConfiguration empty;
    empty.window = CenteredHypDisk{g.rho + 0.01};
    EXPECT_FALSE(closed_event(t.tiles[0], empty, g).value());
    // A dense lattice: local holds at a coarse divisor; all black crosses everything.
    MarkedConfiguration lat;
    lat.window = CenteredHypDisk{g.rho + 0.01};
    const double h = 0.004;
    for (double x = -0.8; x <= 0.8; x += h)
        for (double y = -0.8; y <= 0.8; y += h)
            if (Vec2{x, y}.norm() < 0.799) {
                lat.points.push_back({x + 1e-7 * y, y + 1.3e-7 * x});
                lat.colors.push_back(Color::black);
            }
    EXPECT_TRUE(closed_event(t.tiles[0], lat, g, 10).value());
    EXPECT_FALSE(closed_event(t.tiles[0], lat, g).local);
    MarkedConfiguration small = lat;
    small.window = CenteredHypDisk{1.0};
    EXPECT_THROW(closed_event(t.tiles[0], small, g, 10), MarginError);
}

TEST(ClosedEvent, IsometryIdentity) {
    // closed(T) on Z equals closed(T_o) on the moved configuration.
    SixRectangleParams sp;
    sp.r = 0.6;
    const ClosedEventGeometry g = six_rectangles(sp);
    const Tiling til = generate_tiling(1);
    const TriangleTile& t = til.tiles[2];
    const Circle c = hyp_circle_to_euclid(PoincarePoint(t.center), g.rho);
    SimulationParams p;
    p.lambda = 2000;
    p.p = 0.85;
    p.window = CenteredHypDisk{hyp_radius_of(c.center.norm() + c.radius) + 0.05};
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        p.seed = seed;
        const MarkedConfiguration z = sample_configuration(p);
        const ClosedEventResult a = closed_event(t, z, g, 3);
        MarkedConfiguration moved = z;
        for (Vec2& u : moved.points) u = t.to_base.apply(u);
        moved.window = CenteredHypDisk{g.rho + 1e-9};
        std::vector<Vec2> keep;
        std::vector<Color> cols;
        for (std::size_t i = 0; i < moved.points.size(); ++i)
            if (moved.points[i].norm() < euclid_radius_of(g.rho + 1e-9)) {
                keep.push_back(moved.points[i]);
                cols.push_back(moved.colors[i]);
            }
        moved.points = keep;
        moved.colors = cols;
        const ClosedEventResult b = closed_event(til.tiles[0], moved, g, 3);
        EXPECT_EQ(a.local, b.local);
        EXPECT_EQ(a.crossings, b.crossings);
    }
}

TEST(ClosedEvent, SeparationRasterSmoke) {
    // When all six rectangles are crossed, black pixels of their union enclose o.
    const ClosedEventGeometry g = six_rectangles();
    SimulationParams p;
    p.lambda = 2000;
    p.p = 0.9;
    p.window = CenteredHypDisk{g.rho};
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 30 && checked < 3; ++seed) {
        p.seed = seed;
        const MarkedConfiguration z = sample_configuration(p);
        const VoronoiComplex vc = voronoi_complex(z.points);
        bool all = true;
        for (const Rect& r : g.rects) all = all && CrossingGeometry(r, vc).crosses(z.colors, Color::black);
        if (!all) continue;
        ++checked;
        const int n = 2000;
        const double ext = g.r;
        const SiteIndex index(z.points);
        std::vector<char> wall(static_cast<std::size_t>(n) * n, 0), seen(wall.size(), 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Vec2 u{-ext + (i + 0.5) * 2 * ext / n, -ext + (j + 0.5) * 2 * ext / n};
                bool in = false;
                for (const Rect& r : g.rects) in = in || r.contains(u);
                if (in && z.colors[static_cast<std::size_t>(index.nearest(u, Metric::euclidean))] == Color::black)
                    wall[static_cast<std::size_t>(i) * n + j] = 1;
            }
        std::deque<int> q{(n / 2) * n + n / 2};
        seen[static_cast<std::size_t>(q.front())] = 1;
        bool reached = false;
        while (!q.empty() && !reached) {
            const int id = q.front();
            q.pop_front();
            const int i = id / n, j = id % n;
            const Vec2 u{-ext + (i + 0.5) * 2 * ext / n, -ext + (j + 0.5) * 2 * ext / n};
            if (u.norm() >= g.r - 2 * ext / n) reached = true;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int a = i + di[k], b = j + dj[k];
                if (a < 0 || b < 0 || a >= n || b >= n) continue;
                const std::size_t nid = static_cast<std::size_t>(a) * n + b;
                if (!wall[nid] && !seen[nid]) {
                    seen[nid] = 1;
                    q.push_back(static_cast<int>(nid));
                }
            }
        }
        EXPECT_FALSE(reached) << "seed " << seed;
    }
    EXPECT_GT(checked, 0);
}

TEST(WhiteEscape, BlockedByBlackRing) {
    // Lattice with a black ring around the base tile: no white escape; remove the ring: escape.
    std::vector<Vec2> pts;
    std::vector<Color> cols;
    const double h = 0.01;
    for (double x = -0.78; x <= 0.78; x += h)
        for (double y = -0.78; y <= 0.78; y += h) {
            const Vec2 u{x + 1e-7 * y, y + 1.7e-7 * x};
            if (u.norm() >= 0.79) continue;
            pts.push_back(u);
            cols.push_back(u.norm() > 0.45 && u.norm() < 0.5 ? Color::black : Color::white);
        }
    EXPECT_FALSE(white_escape(pts, cols, 0.75).escaped);
    std::fill(cols.begin(), cols.end(), Color::white);
    const WhiteEscape e = white_escape(pts, cols, 0.75);
    EXPECT_TRUE(e.escaped);
    EXPECT_GT(e.start_cells, 0u);
}

TEST(DependencyRadius, ExhaustiveCount) {
    const ClosedEventGeometry g = six_rectangles();
    const Tiling til = tiling_for_radius(g);
    const DependencyRadius d = dependency_radius(g, til);
    EXPECT_NEAR(d.rho, 2 * std::atanh(0.8), 1e-14);
    // A deeper tiling gives the same count.
    const Tiling deeper = generate_tiling(til.depth + 1);
    EXPECT_EQ(dependency_radius(g, deeper).k, d.k);
    EXPECT_THROW(dependency_radius(g, generate_tiling(2)), DomainError);
    // Small radius: only the base tile.
    ClosedEventGeometry tiny = g;
    tiny.r = 0.01;
    tiny.delta = 0.01;
    EXPECT_EQ(dependency_radius(tiny, generate_tiling(4)).k, 1);
}

TEST(P1Threshold, Values) {
    EXPECT_DOUBLE_EQ(p1_threshold(1, 2), 0.125);
    EXPECT_NEAR(std::log10(p1_threshold(1, 15)), -16 * std::log10(15.0), 1e-12);
    EXPECT_NEAR(std::log10(p1_threshold(1, 15)), -18.82, 0.01);
    EXPECT_GT(p1_threshold(1, 3), p1_threshold(2, 3));
    EXPECT_GT(p1_threshold(2, 3), p1_threshold(2, 4));
    EXPECT_EQ(p1_threshold(600, 15), 0.0);
    EXPECT_NEAR(log10_neg_log_p1_threshold(600, 15), std::log10(std::log(15.0)) + 600 * std::log10(15.0), 1e-9);
    EXPECT_NEAR(log10_neg_log_p1_threshold(1, 2), std::log10(3 * std::log(2.0)), 1e-12);
}

TEST(DependentPercolation, Trivial) {
    const Tiling& t = patch6();
    EXPECT_TRUE(dependent_percolation_run(t, std::vector<bool>(t.size(), false)).components.empty());
    const OpenClusters all = dependent_percolation_run(t, std::vector<bool>(t.size(), true));
    EXPECT_EQ(all.components.size(), 1u);
    EXPECT_EQ(all.largest, t.size());
    EXPECT_TRUE(all.largest_touches_boundary);
}

TEST(DependentPercolation, BlockFieldSubcritical) {
    const Tiling& t = patch6();
    std::size_t worst = 0;
    double open_frac = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto open = block_field(t, 0.001, s);
        worst = std::max(worst, dependent_percolation_run(t, open).largest);
        open_frac += static_cast<double>(std::count(open.begin(), open.end(), true)) / static_cast<double>(t.size());
    }
    EXPECT_LE(worst, 20u);
    EXPECT_LT(open_frac / 1000, 0.0015);
    // Independence at graph distance >= 3: tiles with disjoint neighborhoods.
    int both = 0, first = 0, second = 0;
    int a = 0, b = -1;
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::vector<int> na = t.adjacency[0];
        na.push_back(0);
        bool disjoint = true;
        for (int x : t.adjacency[i]) disjoint = disjoint && std::find(na.begin(), na.end(), x) == na.end();
        disjoint = disjoint && std::find(na.begin(), na.end(), static_cast<int>(i)) == na.end();
        if (disjoint) {
            b = static_cast<int>(i);
            break;
        }
    }
    ASSERT_GE(b, 0);
    for (std::uint64_t s = 0; s < 200000; ++s) {
        const auto open = block_field(t, 0.05, s);
        first += open[static_cast<std::size_t>(a)];
        second += open[static_cast<std::size_t>(b)];
        both += open[static_cast<std::size_t>(a)] && open[static_cast<std::size_t>(b)];
    }
    const double pa = first / 2e5, pb = second / 2e5;
    EXPECT_NEAR(both / 2e5, pa * pb, 4 * std::sqrt(pa * pb / 2e5));
}
