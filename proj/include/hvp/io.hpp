#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coupling.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "percolation.hpp"
#include "pointprocess.hpp"
#include "tiling.hpp"

namespace hvp {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Files

/// Writes a file atomically: the content goes to a sibling temporary which is then
/// renamed over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw DomainError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DomainError("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw DomainError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw DomainError("cannot replace " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------
// Experiment records: CSV with fixed columns and a JSON mirror

/// CSV columns, in order. Wall time is left out so reruns give identical bytes.
inline const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> cols{"id",     "kind",  "metric",    "lambda",       "p",        "window",
                                               "target", "margin", "n",        "seed",         "successes", "undetermined",
                                               "estimate", "ci_lo", "ci_hi",   "truncated",    "version"};
    return cols;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline std::string csv_header() {
    std::string s;
    for (const auto& c : record_columns()) s += (s.empty() ? "" : ",") + c;
    return s + "\n";
}

inline std::string to_csv_row(const ExperimentRecord& r) {
    const std::vector<std::string> f{r.id(),
                                     r.kind,
                                     to_string(r.metric),
                                     fmt_double(r.lambda),
                                     fmt_double(r.p),
                                     r.window,
                                     r.target,
                                     fmt_double(r.margin),
                                     std::to_string(r.n),
                                     std::to_string(r.seed),
                                     std::to_string(r.successes),
                                     std::to_string(r.undetermined),
                                     fmt_double(r.estimate),
                                     fmt_double(r.ci.lo),
                                     fmt_double(r.ci.hi),
                                     r.truncated ? "1" : "0",
                                     r.version};
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + detail::csv_field(f[i]);
    return s + "\n";
}

inline ExperimentRecord from_csv_row(const std::string& line) {
    const auto f = detail::csv_split(line);
    if (f.size() != record_columns().size()) throw DomainError("malformed record row: " + line);
    ExperimentRecord r;
    try {
        r.kind = f[1];
        r.metric = parse_metric(f[2]);
        r.lambda = std::stod(f[3]);
        r.p = std::stod(f[4]);
        r.window = f[5];
        r.target = f[6];
        r.margin = std::stod(f[7]);
        r.n = std::stoull(f[8]);
        r.seed = std::stoull(f[9]);
        r.successes = std::stoull(f[10]);
        r.undetermined = std::stoull(f[11]);
        r.estimate = std::stod(f[12]);
        r.ci = {std::stod(f[13]), std::stod(f[14])};
        r.truncated = f[15] == "1";
        r.version = f[16];
    } catch (const std::logic_error&) {
        throw DomainError("malformed record row: " + line);
    }
    if (r.id() != f[0]) throw DomainError("record identity does not match its fields: " + f[0]);
    return r;
}

inline std::vector<ExperimentRecord> read_records_csv(const std::filesystem::path& path) {
    std::vector<ExperimentRecord> out;
    std::istringstream in(read_file(path));
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        out.push_back(from_csv_row(line));
    }
    return out;
}

inline Json to_json(const ExperimentRecord& r) {
    return Json{{"id", r.id()},
                {"kind", r.kind},
                {"params",
                 {{"metric", to_string(r.metric)},
                  {"lambda", r.lambda},
                  {"p", r.p},
                  {"window", r.window},
                  {"target", r.target},
                  {"margin", r.margin},
                  {"n", r.n},
                  {"seed", r.seed}}},
                {"successes", r.successes},
                {"undetermined", r.undetermined},
                {"estimate", r.estimate},
                {"ci", {{"level", 0.95}, {"method", "wilson"}, {"lo", r.ci.lo}, {"hi", r.ci.hi}}},
                {"wall_seconds", r.wall_seconds},
                {"truncated", r.truncated},
                {"version", r.version}};
}

inline Json to_json(const PcEstimate& e) {
    Json steps = Json::array();
    for (const auto& s : e.steps) steps.push_back(to_json(s));
    return Json{{"lambda", e.lambda}, {"p_lo", e.p_lo},   {"p_hi", e.p_hi},
                {"estimate", e.estimate}, {"proxy", e.proxy}, {"steps", steps}};
}

// ---------------------------------------------------------------------------
// Point sets and other exports

/// CSV point format: x,y,color (and a process column when given).
inline std::string points_csv(const MarkedConfiguration& c) {
    std::string s = "x,y,color\n";
    for (std::size_t i = 0; i < c.size(); ++i)
        s += fmt_double(c.points[i].x) + "," + fmt_double(c.points[i].y) + "," + (c.colors[i] == Color::black ? "black" : "white") + "\n";
    return s;
}

inline std::string coupling_csv(const CoupledSample& s) {
    std::string out = "x,y,color,process\n";
    auto add = [&](const std::vector<Vec2>& pts, const char* color, const char* name) {
        for (const Vec2& u : pts) out += fmt_double(u.x) + "," + fmt_double(u.y) + "," + color + "," + name + "\n";
    };
    add(s.p0, "black", "P0");
    add(s.p1, "black", "P1");
    add(s.p2, "black", "P2");
    add(s.p0w, "white", "P0w");
    add(s.p1w, "white", "P1w");
    add(s.p2w, "white", "P2w");
    return out;
}

inline Json to_json(const Rect& r) {
    return Json{{"corner", {r.corner.x, r.corner.y}},
                {"width", r.width},
                {"height", r.height},
                {"angle", r.angle},
                {"axis", r.crossing_axis() == Axis::horizontal ? "horizontal" : "vertical"}};
}

inline Json crossing_json(const Rect& r, Color color, bool decision, const CrossingWitness* w) {
    Json j{{"rectangle", to_json(r)}, {"color", color == Color::black ? "black" : "white"}, {"decision", decision}};
    if (w) j["witness"] = w->sites;
    return j;
}

inline Json to_json(const Tiling& t) {
    Json tiles = Json::array();
    for (const TriangleTile& tile : t.tiles) {
        Json v = Json::array();
        for (const Vec2& u : tile.vertices) v.push_back({u.x, u.y});
        tiles.push_back({{"id", tile.id},
                         {"word", tile.word},
                         {"center", {tile.center.x, tile.center.y}},
                         {"vertices", v},
                         {"interior", t.interior(tile.id)},
                         {"neighbors", t.adjacency[static_cast<std::size_t>(tile.id)]}});
    }
    return Json{{"depth", t.depth}, {"tiles", tiles}};
}

// ---------------------------------------------------------------------------
// Parsing helpers shared by manifests

inline Rect rect_from_json(const Json& j) {
    Rect r;
    if (j.contains("box")) {
        const auto& b = j.at("box");
        r = Rect::from_box({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()});
    } else {
        r.corner = {j.at("corner").at(0).get<double>(), j.at("corner").at(1).get<double>()};
        r.width = j.at("width").get<double>();
        r.height = j.at("height").get<double>();
        r.angle = j.value("angle", 0.0);
    }
    if (j.contains("axis")) {
        const std::string a = j.at("axis").get<std::string>();
        if (a == "horizontal" || a == "h") r.axis = Axis::horizontal;
        else if (a == "vertical" || a == "v") r.axis = Axis::vertical;
        else throw DomainError("axis must be horizontal or vertical");
    }
    return r;
}

}  // namespace hvp
