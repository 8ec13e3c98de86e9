#pragma once

// One-parameter sweeps: a run per value, each in its own directory, plus a summary table.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "run.hpp"

namespace dispflow {

struct SweepSpec {
    std::string name;  // a, b, m, eps, moll_radius or dt
    std::vector<double> values;
};

/// Parses "NAME=v1,v2,...".
inline SweepSpec parse_sweep_spec(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep parameter must look like NAME=v1,v2,...");
    SweepSpec s;
    s.name = detail::trim(text.substr(0, eq));
    static const std::vector<std::string> allowed = {"a", "b", "m", "eps", "moll_radius", "dt"};
    if (std::find(allowed.begin(), allowed.end(), s.name) == allowed.end())
        throw ConfigError("cannot sweep '" + s.name + "' (a, b, m, eps, moll_radius, dt)");
    std::istringstream is(text.substr(eq + 1));
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = detail::trim(tok);
        double v = 0;
        if (!detail::parse_double(tok, v) || !std::isfinite(v))
            throw ConfigError("sweep value '" + tok + "' is not a number");
        s.values.push_back(v);
    }
    if (s.values.empty()) throw ConfigError("sweep needs at least one value");
    return s;
}

/// Copy of cfg with the swept parameter set, checked with the same rules as a config file.
inline RunConfig sweep_instance(const RunConfig& cfg, const std::string& name, double value) {
    RunConfig c = cfg;
    if (name == "a") c.phys.a = value;
    else if (name == "b") c.phys.b = value;
    else if (name == "m") c.phys.m = value;
    else if (name == "eps") c.reg.eps = value;
    else if (name == "moll_radius") c.reg.moll_radius = value;
    else if (name == "dt") c.dt = value;
    else throw ConfigError("cannot sweep '" + name + "'");
    if (!(c.phys.b > c.phys.a))
        throw ConfigError("sweep value " + name + " = " + format_g17(value) + " violates b > a");
    c.phys.validate();
    c.reg.validate();
    c.validate();
    return c;
}

inline std::string sweep_dir_name(const std::string& name, double value) { return name + "_" + format_shortest(value); }

struct SweepEntry {
    double value = 0.0;
    Diagnostics final_row;
    double max_mass_drift = 0.0;
};

/// Runs every instance in order of increasing value. All instances are validated before the first
/// run starts. Writes <outdir>/<name>_<value>/ for each and <outdir>/summary.csv.
inline std::vector<SweepEntry> run_sweep(const RunConfig& cfg, const SweepSpec& spec,
                                         const std::filesystem::path& outdir) {
    std::vector<double> values = spec.values;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<RunConfig> configs;
    for (double v : values) {
        configs.push_back(sweep_instance(cfg, spec.name, v));
        configs.back().outdir = (outdir / sweep_dir_name(spec.name, v)).string();
    }
    std::filesystem::create_directories(outdir);
    std::ofstream summary(outdir / "summary.csv");
    summary << "param,value," << diagnostics_header() << ",max_mass_drift\n";
    std::vector<SweepEntry> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const RunResult r = run_simulation(configs[i], configs[i].outdir);
        SweepEntry e;
        e.value = values[i];
        e.final_row = r.rows.back();
        for (const auto& d : r.rows) e.max_mass_drift = std::max(e.max_mass_drift, d.mass_drift);
        summary << spec.name << ',' << format_g17(e.value) << ',' << diagnostics_row(e.final_row) << ','
                << format_g17(e.max_mass_drift) << '\n'
                << std::flush;
        out.push_back(e);
    }
    return out;
}

}  // namespace dispflow
