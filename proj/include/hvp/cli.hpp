#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coupling.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "io.hpp"
#include "render.hpp"
#include "sweep.hpp"
#include "tiling.hpp"

namespace hvp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitInternal = 2;

/// Effective configuration: manifest values overridden by inline flags.
struct CliConfig {
    std::string subcommand;
    Json values = Json::object();
    std::filesystem::path out;
    std::uint64_t seed = 0;
    int verbosity = 0;

    double num(const char* key, double fallback) const { return values.contains(key) ? values.at(key).get<double>() : fallback; }
    std::uint64_t count(const char* key, std::uint64_t fallback) const {
        return values.contains(key) ? values.at(key).get<std::uint64_t>() : fallback;
    }
    std::string str(const char* key, const std::string& fallback) const {
        return values.contains(key) ? values.at(key).get<std::string>() : fallback;
    }
    bool flag(const char* key, bool fallback) const { return values.contains(key) ? values.at(key).get<bool>() : fallback; }
    Metric metric(Metric fallback = Metric::hyperbolic) const {
        return values.contains("metric") ? parse_metric(values.at("metric").get<std::string>()) : fallback;
    }
    int jobs() const { return static_cast<int>(count("jobs", 1)); }

    std::string provenance() const {
        Json eff = values;
        eff["seed"] = seed;
        if (!out.empty()) eff["out"] = out.string();
        return std::string(kVersion) + "\ncommand: " + subcommand + "\nseed: " + std::to_string(seed) + "\nconfig: " + eff.dump();
    }
};

namespace detail {

inline Window window_from(const CliConfig& c, const Window& fallback) {
    if (!c.values.contains("window")) return fallback;
    const Json& w = c.values.at("window");
    if (w.contains("hypdisk")) return CenteredHypDisk{w.at("hypdisk").get<double>()};
    if (w.contains("box")) {
        const auto& b = w.at("box");
        return Box{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
    }
    throw DomainError("window must be {\"hypdisk\": rho} or {\"box\": [xmin, xmax, ymin, ymax]}");
}

inline Rect rect_from(const CliConfig& c, const Rect& fallback) {
    return c.values.contains("rect") ? rect_from_json(c.values.at("rect")) : fallback;
}

inline void write_output(const CliConfig& c, std::ostream& out, const std::string& name, const std::string& body, bool csv) {
    std::string header;
    {
        std::istringstream in(c.provenance());
        std::string line;
        while (std::getline(in, line)) header += "# " + line + "\n";
    }
    if (c.out.empty()) {
        out << header << body;
        return;
    }
    const std::filesystem::path path = c.out / name;
    write_file_atomic(path, (csv ? header : std::string()) + body);
    out << header << "wrote " << path.string() << "\n";
}

inline std::string with_provenance(const CliConfig& c, Json j) {
    Json out{{"provenance", c.provenance()}};
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value();
    return out.dump(2) + "\n";
}

inline SimulationParams sim_params(const CliConfig& c, const Window& fallback_window) {
    SimulationParams p;
    p.lambda = c.num("lambda", 1.0);
    p.p = c.num("p", 0.5);
    p.metric = c.metric();
    p.window = window_from(c, p.metric == Metric::hyperbolic ? fallback_window : Window{Box{0, 1, 0, 1}});
    p.seed = c.seed;
    return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_sample(const CliConfig& c, std::ostream& out) {
    const MarkedConfiguration z = sample_configuration(detail::sim_params(c, CenteredHypDisk{2.0}));
    detail::write_output(c, out, "points.csv", points_csv(z), true);
    return kExitOk;
}

inline int cmd_cross(const CliConfig& c, std::ostream& out) {
    const Rect rect = detail::rect_from(c, Rect::from_box({-0.3, 0.3, -0.15, 0.15}));
    const double margin = c.num("margin", 0.2);
    SimulationParams sp = detail::sim_params(c, CenteredHypDisk{2.0});
    if (!c.values.contains("window")) sp.window = rect.bounding_box().dilated(margin);
    const MarkedConfiguration z = sample_configuration(sp);
    const Color color = c.str("color", "black") == "white" ? Color::white : Color::black;
    Json j;
    if (z.points.empty()) {
        j = crossing_json(rect, color, false, nullptr);
        j["note"] = "empty configuration";
    } else {
        const VoronoiComplex vc = voronoi_complex(z.points);
        CrossingWitness w;
        const bool d = cross(rect, z, color, vc, &w, margin);
        j = crossing_json(rect, color, d, d && c.flag("witness", true) ? &w : nullptr);
        const int div = static_cast<int>(c.count("divisor", static_cast<std::uint64_t>(kLocalDivisor)));
        j["local"] = local_event(rect.bounding_box(), margin, z.points, div, sp.metric);
    }
    j["points"] = z.size();
    detail::write_output(c, out, "cross.json", detail::with_provenance(c, j), false);
    return kExitOk;
}

inline int cmd_couple(const CliConfig& c, std::ostream& out) {
    CouplingSpec s;
    s.r = c.num("r", 0.5);
    s.p = c.num("p", 0.6);
    s.p_new = c.num("p_new", 0.55);
    s.lambda = c.num("lambda", 1e5);
    const double t = s.scale().t;
    const double side = 0.999 * t / std::numbers::sqrt2;
    const double cx = c.num("cx", 0.2), cy = c.num("cy", 0.1);
    s.a = Box{cx - side / 2, cx + side / 2, cy - side / 2, cy + side / 2};
    const Box win = region_box(s.a).dilated(c.num("margin", side / 2));
    const CoupledSample cs = build_coupling(s, win, c.seed);
    const bool ok = verify_domination(cs, s.a);
    std::ostringstream summary;
    summary << "# t=" << fmt_double(t) << " mu=" << fmt_double(s.mu()) << " domination=" << (ok ? "true" : "false") << "\n";
    detail::write_output(c, out, "coupling.csv", summary.str() + coupling_csv(cs), true);
    if (!ok) throw InternalError("coupling domination failed");
    return kExitOk;
}

inline int cmd_tiling(const CliConfig& c, std::ostream& out) {
    const int depth = static_cast<int>(c.count("depth", 4));
    const Tiling t = generate_tiling(depth);
    Json j = to_json(t);
    std::size_t interior = 0;
    for (std::size_t i = 0; i < t.size(); ++i) interior += t.interior(static_cast<int>(i));
    j["tile_count"] = t.size();
    j["interior_tiles"] = interior;
    detail::write_output(c, out, "tiling.json", detail::with_provenance(c, j), false);
    return kExitOk;
}

inline int cmd_closed_event(const CliConfig& c, std::ostream& out) {
    SixRectangleParams sp;
    sp.r = c.num("r", sp.r);
    sp.delta = c.num("delta", sp.delta);
    const ClosedEventGeometry g = six_rectangles(sp);
    const Tiling base = generate_tiling(0);
    SimulationParams p = detail::sim_params(c, CenteredHypDisk{g.rho + 0.01});
    p.metric = Metric::hyperbolic;
    if (!c.values.contains("window")) p.window = CenteredHypDisk{g.rho + 0.01};
    const MarkedConfiguration z = sample_configuration(p);
    const int div = static_cast<int>(c.count("divisor", static_cast<std::uint64_t>(kLocalDivisor)));
    const ClosedEventResult r = closed_event(base.tiles[0], z, g, div);
    Json j{{"local", r.local}, {"crossings", r.crossings}, {"closed", r.value()}, {"points", z.size()}, {"divisor", div}};
    if (r.value()) {
        std::vector<Vec2> moved;
        const auto idx = base_frame_subset(base.tiles[0], z.points, g.r + g.delta, moved);
        std::vector<Color> cols;
        for (int i : idx) cols.push_back(z.colors[static_cast<std::size_t>(i)]);
        j["white_escape"] = white_escape(moved, cols, g.r).escaped;
    }
    detail::write_output(c, out, "closed_event.json", detail::with_provenance(c, j), false);
    return kExitOk;
}

inline int cmd_pc(const CliConfig& c, std::ostream& out) {
    PcExperiment e;
    e.lambda = c.num("lambda", 1.0);
    e.metric = c.metric();
    e.proxy = parse_proxy(c.str("proxy", "crossing"));
    e.tolerance = c.num("tolerance", 1e-3);
    e.n = c.count("n", 400);
    e.seed = c.seed;
    e.jobs = c.jobs();
    if (c.values.contains("rect")) e.rect = rect_from_json(c.values.at("rect"));
    if (c.values.contains("window")) e.window = detail::window_from(c, Box{0, 1, 0, 1});
    e.reach_radius = c.num("reach_radius", e.reach_radius);
    e.level = c.num("level", e.level);
    const PcEstimate r = estimate_pc(e);
    detail::write_output(c, out, "pc.json", detail::with_provenance(c, to_json(r)), false);
    return kExitOk;
}

inline std::vector<double> number_list(const Json& j) {
    std::vector<double> v;
    if (j.is_array())
        for (const auto& x : j) v.push_back(x.get<double>());
    else
        v.push_back(j.get<double>());
    return v;
}

inline int cmd_sweep(const CliConfig& c, std::ostream& out, std::ostream& err) {
    if (c.out.empty()) throw DomainError("sweep needs --out (or \"out\" in the manifest)");
    SweepSpec s;
    s.kind = parse_sweep_kind(c.str("kind", "crossing"));
    s.seed = c.seed;
    s.out = c.out / "sweep.csv";
    s.provenance = c.provenance();
    if (c.verbosity > 0) s.progress = [&err](const std::string& m) { err << m << "\n"; };
    const Json grid = c.values.contains("grid") ? c.values.at("grid") : Json::object();
    const auto lambdas = number_list(grid.contains("lambda") ? grid.at("lambda") : Json(c.num("lambda", 1.0)));
    const auto ps = number_list(grid.contains("p") ? grid.at("p") : Json(c.num("p", 0.5)));
    for (double l : lambdas)
        for (double p : ps) s.grid.push_back({l, p});
    CrossingExperiment& ce = s.crossing;
    ce.metric = c.metric(Metric::euclidean);
    ce.rect = detail::rect_from(c, ce.metric == Metric::euclidean ? Rect::from_box({0, 2, 0, 1}) : Rect::from_box({-0.52, 0.52, -0.26, 0.26}));
    ce.margin = c.num("margin", ce.metric == Metric::euclidean ? 1.0 : 0.2);
    ce.n = c.count("n", 100);
    ce.jobs = c.jobs();
    ce.divisor = static_cast<int>(c.count("divisor", static_cast<std::uint64_t>(kLocalDivisor)));
    ce.max_seconds = c.num("max_seconds", 0.0);
    LocalExperiment& le = s.local;
    le.metric = c.metric(Metric::hyperbolic);
    le.delta = c.num("delta", le.delta);
    le.probe_pitch = c.num("probe_pitch", 0.0);
    le.n = c.count("n", 100);
    le.jobs = c.jobs();
    le.divisor = static_cast<int>(c.count("divisor", static_cast<std::uint64_t>(kLocalDivisor)));
    const SweepResult r = sweep(s);
    out << "# " << kVersion << "\n# command: sweep\n# seed: " << c.seed << "\n";
    out << "cells " << r.records.size() << " computed " << r.computed << " reused " << r.reused << "\nwrote " << s.out.string() << "\n";
    return kExitOk;
}

inline int cmd_render(const CliConfig& c, std::ostream& out) {
    if (c.out.empty()) throw DomainError("render needs --out");
    RenderOptions o;
    o.size = static_cast<int>(c.count("size", 800));
    o.clip = c.flag("clip", true);
    o.boundary = c.values.contains("boundary") ? parse_metric(c.str("boundary", "hyp")) : Metric::hyperbolic;
    const std::string id = c.str("id", "hvp");
    const std::string fig = c.str("figure", "voronoi");
    std::string svg;
    if (fig == "voronoi" || fig == "crossing" || fig == "euclidean-cells") {
        SimulationParams p = detail::sim_params(c, CenteredHypDisk{3.0});
        p.metric = Metric::hyperbolic;
        if (fig == "euclidean-cells") o.boundary = Metric::euclidean;
        const MarkedConfiguration z = sample_configuration(p);
        const VoronoiComplex vc = z.points.empty() ? VoronoiComplex{} : voronoi_complex(z.points);
        Overlay ov;
        if (fig == "crossing" && !z.points.empty()) {
            const Rect r = detail::rect_from(c, Rect::from_box({-0.5, 0.5, -0.25, 0.25}));
            ov.rects.push_back(r);
            CrossingWitness w;
            if (CrossingGeometry(r, vc).crosses(z.colors, Color::black, &w)) {
                std::vector<Vec2> line;
                for (int s : w.sites) line.push_back(z.points[static_cast<std::size_t>(s)]);
                ov.polylines.push_back(line);
            }
            o.boundary = Metric::euclidean;
        }
        svg = render_voronoi(z, vc, o, ov);
    } else if (fig == "tiling" || fig == "six") {
        const Tiling t = generate_tiling(static_cast<int>(c.count("depth", 5)));
        std::vector<Rect> rects;
        if (fig == "six") {
            const auto g = six_rectangles();
            rects.assign(g.rects.begin(), g.rects.end());
        }
        svg = render_tiling(t, {0}, rects, o);
    } else if (fig == "subdivision") {
        svg = to_svg(subdivision_scene(detail::rect_from(c, Rect::from_box({-0.6, 0.6, -0.1, 0.1})), o));
    } else {
        throw DomainError("unknown figure '" + fig + "' (voronoi, euclidean-cells, crossing, tiling, six, subdivision)");
    }
    const std::filesystem::path path = c.out / figure_name(id, fig);
    write_file_atomic(path, svg);
    out << "# " << kVersion << "\n# command: render\n# seed: " << c.seed << "\nwrote " << path.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify: quick invariant suites

struct SuiteResult {
    std::string name;
    int passed = 0;
    int total = 0;
};

inline std::vector<SuiteResult> run_suites(std::uint64_t seed) {
    std::vector<SuiteResult> out;
    auto check = [](SuiteResult& s, bool ok) {
        ++s.total;
        s.passed += ok;
    };
    Rng rng(seed);
    {
        SuiteResult s{"geometry"};
        for (int k = 0; k < 200; ++k) {
            auto pt = [&] {
                const double r = 0.95 * std::sqrt(rng.uniform()), a = rng.uniform(0, 2 * std::numbers::pi);
                return Vec2{r * std::cos(a), r * std::sin(a)};
            };
            const Vec2 u = pt(), v = pt(), w = pt();
            const double duv = hvp::detail::hyp_distance(u, v);
            check(s, std::fabs(duv - hvp::detail::hyp_distance(v, u)) < 1e-12);
            check(s, hvp::detail::hyp_distance(u, w) <= duv + hvp::detail::hyp_distance(v, w) + 1e-9);
            const DiskIsometry t = DiskIsometry::to_origin(PoincarePoint(w));
            check(s, std::fabs(hvp::detail::hyp_distance(t.apply(u), t.apply(v)) - duv) < 1e-8 * (1 + duv));
        }
        out.push_back(s);
    }
    {
        SuiteResult s{"voronoi"};
        for (std::uint64_t k = 0; k < 5; ++k) {
            SimulationParams p;
            p.lambda = 2;
            p.window = CenteredHypDisk{2.0};
            p.seed = derive_seed(seed, 100 + k);
            const MarkedConfiguration z = sample_configuration(p);
            if (z.size() < 3) continue;
            const VoronoiComplex vc = voronoi_complex(z.points);
            const double R = CenteredHypDisk{2.0}.euclid_radius();
            for (const DelaunayEdge& e : vc.edges) {
                if (boundary_uncertain(e, vc, R)) continue;
                check(s, hyp_adjacent(e.a, e.b, z.points));
            }
        }
        out.push_back(s);
    }
    {
        SuiteResult s{"percolation"};
        for (std::uint64_t k = 0; k < 50; ++k) {
            SimulationParams p;
            p.lambda = 30;
            p.p = 0.5;
            p.metric = Metric::euclidean;
            p.window = Box{-1, 2, -1, 2};
            p.seed = derive_seed(seed, 200 + k);
            const MarkedConfiguration z = sample_configuration(p);
            const VoronoiComplex vc = voronoi_complex(z.points);
            const bool b = CrossingGeometry(Rect{{0, 0}, 1, 1, 0, Axis::horizontal}, vc).crosses(z.colors, Color::black);
            const bool w = CrossingGeometry(Rect{{0, 0}, 1, 1, 0, Axis::vertical}, vc).crosses(z.colors, Color::white);
            check(s, b != w);
        }
        out.push_back(s);
    }
    {
        SuiteResult s{"coupling"};
        for (std::uint64_t k = 0; k < 100; ++k) {
            const CouplingSpec spec = random_spec(rng, 20);
            const CoupledSample cs = build_coupling(spec, region_box(spec.a).dilated(region_diameter(spec.a)), derive_seed(seed, 300 + k));
            check(s, verify_domination(cs, spec.a));
        }
        out.push_back(s);
    }
    {
        SuiteResult s{"tiling"};
        const Tiling t = generate_tiling(5);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t.interior(static_cast<int>(i))) check(s, t.adjacency[i].size() == 15);
        for (std::size_t v = 0; v < t.vertices.size(); ++v)
            if (t.interior_vertex(static_cast<int>(v))) check(s, t.vertex_tiles[v].size() == 7);
        check(s, validate_separation(six_rectangles()));
        out.push_back(s);
    }
    {
        SuiteResult s{"experiments"};
        for (std::uint64_t n : {1u, 7u, 100u, 1000u})
            for (std::uint64_t k = 0; k <= n; ++k) {
                const Interval a = wilson(k, n), m = wilson(n - k, n);
                check(s, a.contains(static_cast<double>(k) / static_cast<double>(n)));
                check(s, std::fabs(a.lo - (1 - m.hi)) < 1e-12 && std::fabs(a.hi - (1 - m.lo)) < 1e-12);
            }
        CrossingExperiment e;
        e.p = 1.0;
        e.lambda = 4;
        e.n = 20;
        e.seed = seed;
        check(s, estimate_crossing(e).estimate == 1.0);
        out.push_back(s);
    }
    return out;
}

inline int cmd_verify(const CliConfig& c, std::ostream& out) {
    const auto suites = run_suites(c.seed);
    out << "# " << kVersion << "\n# command: verify\n# seed: " << c.seed << "\n";
    bool ok = true;
    for (const auto& s : suites) {
        out << s.name << ": " << s.passed << "/" << s.total << " passed\n";
        ok = ok && s.passed == s.total && s.total > 0;
    }
    out << (ok ? "all suites passed" : "invariant violation") << "\n";
    return ok ? kExitOk : kExitInternal;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Poisson-Voronoi percolation in the hyperbolic and Euclidean plane", "hvp"};
    app.require_subcommand(1);
    std::string manifest, out_dir, metric;
    std::optional<std::uint64_t> seed, n;
    std::optional<double> lambda, p;
    std::optional<int> jobs;
    int verbosity = 0;
    const std::vector<std::pair<const char*, const char*>> subs{
        {"sample", "emit a marked point set as CSV"},
        {"cross", "decide cross(R) on a fresh sample, with a witness"},
        {"couple", "build and verify a coupling, emit the six processes"},
        {"tiling", "generate the (7,7,7) triangulation patch"},
        {"closed-event", "evaluate closed(T_o) on a fresh sample"},
        {"pc", "estimate the critical probability proxy"},
        {"sweep", "run a grid of experiments with resumable output"},
        {"render", "write an SVG figure"},
        {"verify", "run the invariant suites"}};
    for (const auto& [name, help] : subs) {
        CLI::App* s = app.add_subcommand(name, help);
        s->add_option("--manifest", manifest, "JSON manifest");
        s->add_option("--seed", seed, "master seed");
        s->add_option("--out", out_dir, "output directory");
        s->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        s->add_option("--lambda", lambda, "intensity");
        s->add_option("--p", p, "probability of black");
        s->add_option("--metric", metric, "hyp or euc")->check(CLI::IsMember({"hyp", "euc"}));
        s->add_option("--n", n, "replicates");
        s->add_flag("-v,--verbose", verbosity, "progress on standard error");
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitDomain;
    }
    try {
        CliConfig c;
        c.subcommand = app.get_subcommands().front()->get_name();
        if (!manifest.empty()) {
            try {
                c.values = Json::parse(read_file(manifest));
            } catch (const Json::parse_error& e) {
                throw DomainError(std::string("manifest is not valid JSON: ") + e.what());
            }
            if (!c.values.is_object()) throw DomainError("manifest must be a JSON object");
        }
        if (c.values.contains("seed")) c.seed = c.values.at("seed").get<std::uint64_t>();
        if (c.values.contains("out")) c.out = c.values.at("out").get<std::string>();
        if (seed) c.seed = *seed;
        if (!out_dir.empty()) c.out = out_dir;
        c.values.erase("seed");
        c.values.erase("out");
        if (lambda) c.values["lambda"] = *lambda;
        if (p) c.values["p"] = *p;
        if (n) c.values["n"] = *n;
        if (jobs) c.values["jobs"] = *jobs;
        if (!metric.empty()) c.values["metric"] = metric;
        c.verbosity = verbosity;
        if (verbosity > 0) err << "effective config: " << c.provenance() << "\n";
        const std::string& s = c.subcommand;
        if (s == "sample") return cmd_sample(c, out);
        if (s == "cross") return cmd_cross(c, out);
        if (s == "couple") return cmd_couple(c, out);
        if (s == "tiling") return cmd_tiling(c, out);
        if (s == "closed-event") return cmd_closed_event(c, out);
        if (s == "pc") return cmd_pc(c, out);
        if (s == "sweep") return cmd_sweep(c, out, err);
        if (s == "render") return cmd_render(c, out);
        return cmd_verify(c, out);
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const Json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace hvp::cli
