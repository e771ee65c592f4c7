#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "experiments.hpp"
#include "io.hpp"

namespace hvp {

enum class SweepKind { crossing, local };

inline const char* to_string(SweepKind k) { return k == SweepKind::crossing ? "crossing" : "local"; }
inline SweepKind parse_sweep_kind(const std::string& s) {
    if (s == "crossing") return SweepKind::crossing;
    if (s == "local") return SweepKind::local;
    throw DomainError("unknown experiment kind '" + s + "' (expected crossing or local)");
}

struct SweepCell {
    double lambda = 1.0;
    double p = 0.5;  ///< ignored by the local kind
};

struct SweepSpec {
    std::vector<SweepCell> grid;
    SweepKind kind = SweepKind::crossing;
    CrossingExperiment crossing;  ///< template; lambda, p and seed are set per cell
    LocalExperiment local;        ///< template; lambda and seed are set per cell
    std::uint64_t seed = 0;
    std::filesystem::path out;     ///< CSV path; the JSON mirror replaces the extension
    std::string provenance;        ///< written as '#' comment lines before the header
    std::function<void(const std::string&)> progress;
};

struct SweepResult {
    std::vector<ExperimentRecord> records;
    std::size_t computed = 0;
    std::size_t reused = 0;
};

inline std::filesystem::path json_mirror_path(const std::filesystem::path& csv) {
    std::filesystem::path p = csv;
    return p.replace_extension(".json");
}

/// Runs every cell of the grid with seed derive_seed(master, cell index). Records already
/// present in the output (same identity) are reused; each new record is persisted before
/// the next cell starts.
inline SweepResult sweep(const SweepSpec& spec) {
    if (spec.out.empty()) throw DomainError("sweep needs an output path");
    const std::filesystem::path json_path = json_mirror_path(spec.out);
    std::map<std::string, ExperimentRecord> done;
    if (std::filesystem::exists(spec.out))
        for (ExperimentRecord& r : read_records_csv(spec.out)) done.emplace(r.id(), r);
    std::map<std::string, double> wall;
    if (std::filesystem::exists(json_path)) {
        try {
            const Json j = Json::parse(read_file(json_path));
            for (const auto& r : j.at("records")) wall[r.at("id").get<std::string>()] = r.at("wall_seconds").get<double>();
        } catch (const std::exception&) {
            wall.clear();
        }
    }
    std::string header;
    {
        std::istringstream in(spec.provenance);
        std::string line;
        while (std::getline(in, line)) header += "# " + line + "\n";
    }
    header += csv_header();
    SweepResult res;
    auto persist = [&] {
        std::string csv = header;
        Json records = Json::array();
        for (const auto& r : res.records) {
            csv += to_csv_row(r);
            records.push_back(to_json(r));
        }
        write_file_atomic(spec.out, csv);
        write_file_atomic(json_path, Json{{"provenance", spec.provenance}, {"records", records}}.dump(2) + "\n");
    };
    persist();
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
        const SweepCell& c = spec.grid[i];
        const std::uint64_t s = derive_seed(spec.seed, i);
        ExperimentRecord stub;
        CrossingExperiment ce = spec.crossing;
        LocalExperiment le = spec.local;
        if (spec.kind == SweepKind::crossing) {
            ce.lambda = c.lambda;
            ce.p = c.p;
            ce.seed = s;
            stub = crossing_stub(ce);
        } else {
            le.lambda = c.lambda;
            le.seed = s;
            stub = local_stub(le);
        }
        const auto it = done.find(stub.id());
        if (it != done.end() && !it->second.truncated) {
            ExperimentRecord r = it->second;
            if (const auto w = wall.find(r.id()); w != wall.end()) r.wall_seconds = w->second;
            res.records.push_back(r);
            ++res.reused;
        } else {
            res.records.push_back(spec.kind == SweepKind::crossing ? estimate_crossing(ce) : estimate_local_prob(le).record);
            ++res.computed;
        }
        persist();
        if (spec.progress)
            spec.progress("cell " + std::to_string(i + 1) + "/" + std::to_string(spec.grid.size()) + " lambda=" + fmt_double(c.lambda) +
                          " p=" + fmt_double(c.p) + " estimate=" + fmt_double(res.records.back().estimate));
    }
    return res;
}

}  // namespace hvp
