#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <set>

#include "hvp/percolation.hpp"

using namespace hvp;

namespace {

MarkedConfiguration euclid_config(double mu, const Box& window, double p, std::uint64_t seed) {
    SimulationParams sp;
    sp.lambda = mu;
    sp.p = p;
    sp.metric = Metric::euclidean;
    sp.window = window;
    sp.seed = seed;
    return sample_configuration(sp);
}

MarkedConfiguration explicit_config(std::vector<Vec2> pts, std::vector<Color> colors, Window window) {
    MarkedConfiguration c;
    c.points = std::move(pts);
    c.colors = std::move(colors);
    for (Color col : c.colors) c.mark_uniforms.push_back(col == Color::black ? 0.25 : 0.75);
    c.window = window;
    return c;
}

// Colors an N x N pixel grid over R (in R's frame) by nearest site and searches a
// 4-connected path of the given color between the designated sides.
bool raster_cross(const Rect& r, const MarkedConfiguration& cfg, Color color, const CrossingGeometry& geo, int n = 2000) {
    const std::vector<int>& cand = geo.sites();
    std::vector<Vec2> local;
    for (int s : cand) local.push_back(r.to_local(cfg.points[static_cast<std::size_t>(s)]));
    const bool horiz = geo.axis() == Axis::horizontal;
    std::vector<char> on(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 q{(i + 0.5) / n * r.width, (j + 0.5) / n * r.height};
            int best = 0;
            double bd = kInf;
            for (std::size_t k = 0; k < local.size(); ++k) {
                const double d = (local[k] - q).norm2();
                if (d < bd) {
                    bd = d;
                    best = static_cast<int>(k);
                }
            }
            on[static_cast<std::size_t>(i) * n + j] = cfg.colors[static_cast<std::size_t>(cand[static_cast<std::size_t>(best)])] == color;
        }
    std::vector<char> seen(on.size(), 0);
    std::deque<std::pair<int, int>> q;
    for (int t = 0; t < n; ++t) {
        const int i = horiz ? 0 : t, j = horiz ? t : 0;
        if (on[static_cast<std::size_t>(i) * n + j]) {
            seen[static_cast<std::size_t>(i) * n + j] = 1;
            q.emplace_back(i, j);
        }
    }
    while (!q.empty()) {
        const auto [i, j] = q.front();
        q.pop_front();
        if ((horiz ? i : j) == n - 1) return true;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int a = i + di[k], b = j + dj[k];
            if (a < 0 || b < 0 || a >= n || b >= n) continue;
            const std::size_t id = static_cast<std::size_t>(a) * n + b;
            if (on[id] && !seen[id]) {
                seen[id] = 1;
                q.emplace_back(a, b);
            }
        }
    }
    return false;
}

}  // namespace

TEST(Rect, FramesAndAxis) {
    Rect r{{1, 2}, 3, 1, 0.7, std::nullopt};
    EXPECT_EQ(r.crossing_axis(), Axis::horizontal);
    const Vec2 p{0.3, -0.4};
    const Vec2 back = r.to_world(r.to_local(p));
    EXPECT_NEAR(back.x, p.x, 1e-14);
    EXPECT_NEAR(back.y, p.y, 1e-14);
    Rect sq{{0, 0}, 1, 1, 0, std::nullopt};
    EXPECT_THROW(sq.crossing_axis(), DomainError);
    sq.axis = Axis::vertical;
    EXPECT_EQ(sq.crossing_axis(), Axis::vertical);
    EXPECT_EQ(Rect::from_box({0, 1, 0, 2}).crossing_axis(), Axis::vertical);
}

TEST(Cross, TrivialColorings) {
    const Box w{-1, 2, -1, 2};
    auto cfg = euclid_config(30, w, 1.0, 5);
    const VoronoiComplex vc = voronoi_complex(cfg.points);
    const Rect r = Rect::from_box({0, 1, 0.3, 0.7});
    EXPECT_TRUE(cross(r, cfg, Color::black, vc));
    EXPECT_FALSE(cross(r, cfg, Color::white, vc));
    auto one = explicit_config({{0.5, 0.5}}, {Color::black}, Box{-1, 2, -1, 2});
    EXPECT_TRUE(cross(r, one, Color::black, voronoi_complex(one.points)));
}

TEST(Cross, Errors) {
    const Rect r = Rect::from_box({0, 1, 0.3, 0.7});
    MarkedConfiguration empty;
    empty.window = Box{-1, 2, -1, 2};
    VoronoiComplex vc;
    EXPECT_THROW(cross(r, empty, Color::black, vc), DegenerateInput);
    auto cfg = euclid_config(30, {0, 1, 0, 1}, 0.5, 3);
    const VoronoiComplex c2 = voronoi_complex(cfg.points);
    EXPECT_NO_THROW(cross(r, cfg, Color::black, c2));
    EXPECT_THROW(cross(r, cfg, Color::black, c2, nullptr, 0.1), MarginError);
}

TEST(Cross, CorridorWitness) {
    // Three black sites along the midline flanked by white sites above and below.
    std::vector<Vec2> pts{{0.1, 0.5}, {0.5, 0.52}, {0.9, 0.49}, {0.5, 0.95}, {0.45, 0.05}, {0.05, 0.9}, {0.95, 0.1}};
    std::vector<Color> cols{Color::black, Color::black, Color::black, Color::white, Color::white, Color::white, Color::white};
    auto cfg = explicit_config(pts, cols, Box{-1, 2, -1, 2});
    const VoronoiComplex vc = voronoi_complex(cfg.points);
    const Rect r = Rect::from_box({0, 1, 0.3, 0.7});
    CrossingWitness w;
    ASSERT_TRUE(cross(r, cfg, Color::black, vc, &w));
    EXPECT_EQ(w.sites, (std::vector<int>{0, 1, 2}));
    const CrossingGeometry geo(r, vc);
    EXPECT_TRUE(raster_cross(r, cfg, Color::black, geo));
    EXPECT_FALSE(cross(r, cfg, Color::white, vc));
    EXPECT_FALSE(raster_cross(r, cfg, Color::white, geo));
}

TEST(Cross, WitnessIsAValidChain) {
    const Box w{-1, 2, -1, 2};
    const Rect r = Rect::from_box({0, 1, 0, 0.5});
    int found = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        auto cfg = euclid_config(60, w, 0.55, seed);
        const VoronoiComplex vc = voronoi_complex(cfg.points);
        CrossingWitness wit;
        if (!cross(r, cfg, Color::black, vc, &wit)) continue;
        ++found;
        const CrossingGeometry geo(r, vc);
        ASSERT_FALSE(wit.sites.empty());
        std::vector<int> local_of(cfg.size(), -1);
        for (std::size_t k = 0; k < geo.sites().size(); ++k) local_of[static_cast<std::size_t>(geo.sites()[k])] = static_cast<int>(k);
        for (int s : wit.sites) EXPECT_EQ(cfg.colors[static_cast<std::size_t>(s)], Color::black);
        EXPECT_TRUE(geo.touches_start(static_cast<std::size_t>(local_of[static_cast<std::size_t>(wit.sites.front())])));
        EXPECT_TRUE(geo.touches_end(static_cast<std::size_t>(local_of[static_cast<std::size_t>(wit.sites.back())])));
        for (std::size_t k = 0; k + 1 < wit.sites.size(); ++k) {
            ASSERT_GE(vc.find_edge(wit.sites[k], wit.sites[k + 1]), 0);
            const auto& adj = geo.adjacent(static_cast<std::size_t>(local_of[static_cast<std::size_t>(wit.sites[k])]));
            EXPECT_NE(std::find(adj.begin(), adj.end(), local_of[static_cast<std::size_t>(wit.sites[k + 1])]), adj.end());
        }
    }
    EXPECT_GT(found, 5);
}

TEST(Cross, DualityOnSquares) {
    const Box w{-0.5, 1.5, -0.5, 1.5};
    Rect lr = Rect::from_box({0, 1, 0, 1}, Axis::horizontal);
    Rect tb = Rect::from_box({0, 1, 0, 1}, Axis::vertical);
    int black = 0, exceptions = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const double mu = 40 + static_cast<double>(seed % 7) * 30;
        auto cfg = euclid_config(mu, w, 0.5, 1000 + seed);
        const VoronoiComplex vc = voronoi_complex(cfg.points);
        const bool b = cross(lr, cfg, Color::black, vc), wh = cross(tb, cfg, Color::white, vc);
        black += b;
        exceptions += b == wh;
    }
    EXPECT_EQ(exceptions, 0);
    EXPECT_GT(black, 150);
    EXPECT_LT(black, 350);
}

TEST(Cross, DualityOnLatticeTies) {
    // Cocircular lattice sites: the tie-break decides every cell contact.
    std::vector<Vec2> pts;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) pts.push_back({-0.3 + 0.125 * i, -0.3 + 0.125 * j});
    const VoronoiComplex vc = voronoi_complex(pts);
    Rng rng(77);
    int exceptions = 0;
    for (int rep = 0; rep < 200; ++rep) {
        auto cfg = mark(pts, 0.5, rng);
        cfg.window = Box{-0.5, 1.5, -0.5, 1.5};
        const bool b = cross(Rect::from_box({0, 1, 0, 1}, Axis::horizontal), cfg, Color::black, vc);
        const bool wh = cross(Rect::from_box({0, 1, 0, 1}, Axis::vertical), cfg, Color::white, vc);
        exceptions += b == wh;
    }
    EXPECT_EQ(exceptions, 0);
}

TEST(Cross, ColorSymmetry) {
    const Box w{-1, 2, -1, 2};
    const Rect r{{0.1, 0.2}, 0.8, 0.45, 0.3, std::nullopt};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto cfg = euclid_config(50, w, 0.5, 300 + seed);
        const VoronoiComplex vc = voronoi_complex(cfg.points);
        auto swapped = cfg;
        for (Color& c : swapped.colors) c = opposite(c);
        EXPECT_EQ(cross(r, cfg, Color::black, vc), cross(r, swapped, Color::white, vc));
        EXPECT_EQ(cross(r, cfg, Color::white, vc), cross(r, swapped, Color::black, vc));
    }
}

TEST(Cross, MonotoneInP) {
    const Box w{-1, 2, -1, 2};
    const Rect r = Rect::from_box({0, 1, 0.2, 0.7});
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto cfg = euclid_config(80, w, 0.0, 500 + seed);
        const VoronoiComplex vc = voronoi_complex(cfg.points);
        const CrossingGeometry geo(r, vc);
        const double tb = geo.black_threshold(cfg.mark_uniforms);
        const double tw = geo.white_threshold(cfg.mark_uniforms);
        bool was_black = false, was_white = true;
        for (int k = 0; k <= 50; ++k) {
            const double p = k / 50.0;
            auto c = remark(cfg, p);
            const bool b = cross(r, c, Color::black, vc);
            const bool wh = cross(r, c, Color::white, vc);
            EXPECT_TRUE(!was_black || b);
            EXPECT_TRUE(was_white || !wh);
            EXPECT_EQ(b, p > tb);
            EXPECT_EQ(wh, p <= tw);
            was_black = b;
            was_white = wh;
        }
    }
}

TEST(Cross, RasterizationAgreement) {
    const Box w{-1, 2, -1, 2};
    int disagreements = 0, positives = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rr(derive_seed(9000, seed));
        const Rect r{{rr.uniform(0, 0.3), rr.uniform(0, 0.3)}, rr.uniform(0.5, 0.7), rr.uniform(0.25, 0.45), rr.uniform(-0.4, 0.4),
                     std::nullopt};
        auto cfg = euclid_config(50, w, 0.5, 7000 + seed);
        const VoronoiComplex vc = voronoi_complex(cfg.points);
        const CrossingGeometry geo(r, vc);
        const bool uf = geo.crosses(cfg.colors, Color::black);
        positives += uf;
        disagreements += uf != raster_cross(r, cfg, Color::black, geo);
    }
    EXPECT_EQ(disagreements, 0);
    EXPECT_GT(positives, 10);
    EXPECT_LT(positives, 90);
}

TEST(Cross, HyperbolicWindow) {
    SimulationParams sp;
    sp.lambda = 30;
    sp.p = 0.5;
    sp.window = CenteredHypDisk{2.5};
    sp.seed = 4;
    auto cfg = sample_configuration(sp);
    const VoronoiComplex vc = voronoi_complex(cfg.points);
    const Rect r = Rect::from_box({-0.4, 0.4, -0.2, 0.2});
    const CrossingGeometry geo(r, vc);
    EXPECT_EQ(cross(r, cfg, Color::black, vc), raster_cross(r, cfg, Color::black, geo));
    EXPECT_THROW(cross(r, cfg, Color::black, vc, nullptr, 0.6), MarginError);
}

TEST(Subdivision, PiecesAndImplication) {
    const Rect r{{0.05, 0.1}, 0.9, 0.3, 0.2, std::nullopt};
    const auto parts = subdivide_crossing(r);
    ASSERT_GE(parts.size(), 3u);
    for (const Rect& q : parts) {
        const double lo = std::min(q.width, q.height), hi = std::max(q.width, q.height);
        EXPECT_NEAR(hi, 2 * lo, 1e-12);
        // Crossing along the long side.
        EXPECT_EQ(q.crossing_axis(), q.width > q.height ? Axis::horizontal : Axis::vertical);
        for (const Vec2& c : q.corners()) {
            const Vec2 l = r.to_local(c);
            EXPECT_GE(l.x, -1e-12);
            EXPECT_LE(l.x, r.width + 1e-12);
            EXPECT_GE(l.y, -1e-12);
            EXPECT_LE(l.y, r.height + 1e-12);
        }
    }
    const Box w{-1, 2, -1, 2};
    int all = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto cfg = euclid_config(100, w, 0.7, 11000 + seed);
        const VoronoiComplex vc = voronoi_complex(cfg.points);
        bool every = true;
        for (const Rect& q : parts) every = every && cross(q, cfg, Color::black, vc);
        if (!every) continue;
        ++all;
        EXPECT_TRUE(cross(r, cfg, Color::black, vc));
    }
    EXPECT_GT(all, 10);
    const auto vparts = subdivide_crossing(Rect::from_box({0, 0.3, 0, 0.9}));
    for (const Rect& q : vparts) EXPECT_NEAR(std::max(q.width, q.height), 2 * std::min(q.width, q.height), 1e-12);
}

TEST(Cluster, TrivialCases) {
    std::vector<Vec2> pts{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {0.7, 0.7}, {-0.7, -0.7}, {0.7, -0.7}, {-0.7, 0.7}};
    std::vector<Color> cols(pts.size(), Color::white);
    cols[0] = Color::black;
    auto cfg = explicit_config(pts, cols, Box{-2, 2, -2, 2});
    const VoronoiComplex vc = voronoi_complex(cfg.points);
    EXPECT_EQ(cluster(cfg, vc, Color::black, 0), std::vector<int>{0});
    EXPECT_THROW(cluster(cfg, vc, Color::black, 1), DomainError);
    std::fill(cfg.colors.begin(), cfg.colors.end(), Color::white);
    EXPECT_EQ(cluster(cfg, vc, Color::white, 3).size(), pts.size());
}

TEST(Cluster, MatchesTransitiveClosure) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto cfg = euclid_config(150, {0, 1, 0, 1}, 0.5, 20000 + seed);
        const VoronoiComplex vc = voronoi_complex(cfg.points);
        const std::size_t n = cfg.size();
        std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
        for (std::size_t i = 0; i < n; ++i) {
            reach[i][i] = 1;
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && cfg.colors[i] == cfg.colors[j] && euclid_adjacent(static_cast<int>(i), static_cast<int>(j), vc)) reach[i][j] = 1;
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (reach[i][k])
                    for (std::size_t j = 0; j < n; ++j) reach[i][j] |= reach[k][j];
        for (Color c : {Color::black, Color::white}) {
            const auto labels = cluster_labels(cfg, vc, c);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (cfg.colors[i] != c || cfg.colors[j] != c) continue;
                    EXPECT_EQ(labels[i] == labels[j], reach[i][j] != 0);
                }
        }
    }
}

TEST(LocalEvent, GridBasics) {
    const LocalGrid g(Box{0.1013, 0.2007, 0.1003, 0.1517}, 0.0197, 10);
    EXPECT_DOUBLE_EQ(g.pitch(), 0.00197);
    std::int64_t counted = 0;
    for (std::int64_t k = 0; k < g.square_count(); ++k) {
        const auto [i, j] = g.square_at(k);
        EXPECT_EQ(g.index_of(i, j), k);
        const Box b = g.square_box(i, j);
        // Every corner of a square of the grid lies in A_delta.
        for (Vec2 c : {Vec2{b.xmin, b.ymin}, Vec2{b.xmax, b.ymin}, Vec2{b.xmin, b.ymax}, Vec2{b.xmax, b.ymax}}) {
            const Vec2 q = Box{0.1013, 0.2007, 0.1003, 0.1517}.clamp(c);
            EXPECT_LE((q - c).norm(), 0.0197 + 1e-12);
        }
        ++counted;
    }
    // Brute-force count over a neighborhood of A_delta.
    std::int64_t brute = 0;
    for (int i = 30; i < 120; ++i)
        for (int j = 30; j < 100; ++j) {
            const Box b = g.square_box(i, j);
            bool in = true;
            for (Vec2 c : {Vec2{b.xmin, b.ymin}, Vec2{b.xmax, b.ymin}, Vec2{b.xmin, b.ymax}, Vec2{b.xmax, b.ymax}})
                in = in && (Box{0.1013, 0.2007, 0.1003, 0.1517}.clamp(c) - c).norm() <= 0.0197;
            brute += in;
        }
    EXPECT_EQ(counted, brute);
}

TEST(LocalEvent, EmptyAndErrors) {
    EXPECT_FALSE(local_event(Box{0, 0.1, 0, 0.1}, 0.05, std::vector<Vec2>{}));
    EXPECT_THROW(local_event(Box{0.5, 0.9, 0, 0.1}, 0.2, std::vector<Vec2>{}), DomainError);
    EXPECT_NO_THROW(local_event(Box{0.5, 0.9, 0, 0.1}, 0.2, std::vector<Vec2>{}, 1000, Metric::euclidean));
    EXPECT_THROW(LocalGrid(Disk{{0, 0}, 0}, 1e-3, 1), DegenerateInput);
    EXPECT_THROW(local_event(Box{0, 0.1, 0, 0.1}, 0.0, std::vector<Vec2>{}), DomainError);
}

TEST(LocalEvent, HalfPitchLatticeCovers) {
    const double delta = 0.004;
    const Disk a{{0.31, 0.22}, 0.0};
    const double h = delta / 2000;
    std::vector<Vec2> pts;
    const auto i0 = static_cast<std::int64_t>(std::floor((a.center.x - delta) / h)) - 2;
    const auto i1 = static_cast<std::int64_t>(std::ceil((a.center.x + delta) / h)) + 2;
    const auto j0 = static_cast<std::int64_t>(std::floor((a.center.y - delta) / h)) - 2;
    const auto j1 = static_cast<std::int64_t>(std::ceil((a.center.y + delta) / h)) + 2;
    for (std::int64_t i = i0; i <= i1; ++i)
        for (std::int64_t j = j0; j <= j1; ++j) {
            const Vec2 p{(static_cast<double>(i) + 0.5) * h, (static_cast<double>(j) + 0.5) * h};
            if ((p - a.center).norm() <= delta + 2 * h) pts.push_back(p);
        }
    EXPECT_TRUE(local_event(a, delta, pts));
    // Removing one point empties a square.
    const LocalGrid g(a, delta);
    const Box b = g.square_box(g.square_at(g.square_count() / 2).first, g.square_at(g.square_count() / 2).second);
    std::erase_if(pts, [&](Vec2 p) { return b.contains(p); });
    EXPECT_FALSE(local_event(a, delta, pts));
}

TEST(LocalEvent, LocalityOnLatticeSamples) {
    const Box a{0.2, 0.22, 0.1, 0.12};
    const double delta = 0.05;
    const LocalGrid grid(a, delta);
    const double lambda = 4e9;
    int held = 0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const LatticePoissonField field(grid, lambda, seed);
        if (!field.event()) continue;
        ++held;
        const LocalityReport rep = field.locality_check();
        EXPECT_GT(rep.probes, 1000u);
        EXPECT_EQ(rep.euclid_violations, 0u);
        EXPECT_EQ(rep.hyp_violations, 0u);
    }
    EXPECT_GT(held, 0);
}

TEST(LocalEvent, AdversarialCornerPoints) {
    // One point per square, pushed to the corner away from A.
    const Box a{0.3, 0.302, 0.2, 0.202};
    const double delta = 0.006;
    const LocalGrid g(a, delta);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(g.square_count()));
    const Vec2 c = a.center();
    for (std::int64_t k = 0; k < g.square_count(); ++k) {
        const auto [i, j] = g.square_at(k);
        const Box b = g.square_box(i, j);
        const Vec2 far = b.farthest_from(c);
        pts.push_back(far + (b.center() - far) * 1e-6);
    }
    ASSERT_TRUE(local_event(a, delta, pts));
    MarkedConfiguration cfg;
    cfg.points = pts;
    cfg.colors.assign(pts.size(), Color::black);
    EXPECT_TRUE(locality_radius_check(a, delta, cfg));
    const LocalityReport rep = locality_check(a, delta, pts);
    EXPECT_EQ(rep.euclid_violations, 0u);
}

TEST(LatticeField, EventFrequencyMatchesProduct) {
    const LocalGrid g(Box{0.0, 0.1, 0.0, 0.1}, 0.05, 8);
    // Intensity putting the event probability near one half.
    double lo = 1, hi = 1e6;
    for (int it = 0; it < 100; ++it) {
        const double mid = std::sqrt(lo * hi);
        (LatticePoissonField::local_event_probability(g, mid) < 0.5 ? lo : hi) = mid;
    }
    const double lambda = hi;
    const double p = LatticePoissonField::local_event_probability(g, lambda);
    const int n = 4000;
    int hits = 0;
    for (int s = 0; s < n; ++s) hits += LatticePoissonField(g, lambda, static_cast<std::uint64_t>(s)).event();
    const double sigma = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(hits / static_cast<double>(n), p, 4 * sigma);
}

TEST(LatticeField, AgreesWithDirectSampling) {
    // Lattice-field event equals the event evaluated on its explicit points, and its
    // event rate matches direct Poisson sampling.
    const Box a{-0.05, 0.05, 0.1, 0.2};
    const double delta = 0.04;
    const LocalGrid g(a, delta, 5);
    double lo = 1, hi = 1e6;
    for (int it = 0; it < 100; ++it) {
        const double mid = std::sqrt(lo * hi);
        (LatticePoissonField::local_event_probability(g, mid) < 0.5 ? lo : hi) = mid;
    }
    const double lambda = hi;
    const Box region = a.dilated(delta + 0.01);
    int direct = 0, lattice = 0;
    const int n = 1500;
    for (int s = 0; s < n; ++s) {
        const LatticePoissonField f(g, lambda, static_cast<std::uint64_t>(s));
        EXPECT_EQ(f.event(), local_event(a, delta, f.points_in(region), 5));
        lattice += f.event();
        Rng rng(derive_seed(777, static_cast<std::uint64_t>(s)));
        direct += local_event(a, delta, sample_hyp_ppp(lambda, region, rng), 5);
    }
    const double p = LatticePoissonField::local_event_probability(g, lambda);
    const double sigma = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(direct / static_cast<double>(n), p, 4 * sigma);
    EXPECT_NEAR(lattice / static_cast<double>(n), p, 4 * sigma);
}

TEST(LatticeField, SquareMassMatchesQuadrature) {
    const Box b{0.3, 0.35, -0.2, -0.15};
    const double exact = integrate([&](double x) { return integrate([&](double y) { return hyp_density({x, y}); }, b.ymin, b.ymax, 1e-13); },
                                   b.xmin, b.xmax, 1e-12);
    EXPECT_NEAR(detail::square_mass(b, 1.0) / exact, 1.0, 1e-4);
}
