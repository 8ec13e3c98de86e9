#pragma once

// Run configuration: flat "key = value" text with '#' comments.

#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"
#include "io.hpp"

namespace dispflow {

struct RunConfig {
    GridSpec grid{65, 65, 1.0, 1.0, 0.0, 0.0};
    PhysParams phys;
    RegParams reg;
    double dt = 0.0;
    double t_end = 0.0;
    double picard_tol = 1e-10;
    int picard_max = 50;
    double lin_tol = 1e-10;
    int lin_max = 2000;
    std::string ic;
    std::string ic_params;
    int output_every = 10;
    std::string outdir = "run";

    /// Validation for the solver; isotropic a == b is allowed here, the parser is stricter.
    void validate() const {
        grid.validate();
        phys.validate_allow_isotropic();
        reg.validate();
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
        if (!(t_end >= dt)) throw ConfigError("t_end must be >= dt");
        if (!(picard_tol > 0.0) || !(lin_tol > 0.0)) throw ConfigError("tolerances must be positive");
        if (picard_max < 1 || lin_max < 1) throw ConfigError("iteration limits must be >= 1");
        if (output_every < 1) throw ConfigError("output_every must be >= 1");
        if (ic.empty()) throw ConfigError("ic must not be empty");
    }

    friend bool operator==(const RunConfig& x, const RunConfig& y) {
        return x.grid == y.grid && x.phys.a == y.phys.a && x.phys.b == y.phys.b && x.phys.m == y.phys.m &&
               x.reg.eps == y.reg.eps && x.reg.moll_radius == y.reg.moll_radius && x.dt == y.dt &&
               x.t_end == y.t_end && x.picard_tol == y.picard_tol && x.picard_max == y.picard_max &&
               x.lin_tol == y.lin_tol && x.lin_max == y.lin_max && x.ic == y.ic && x.ic_params == y.ic_params &&
               x.output_every == y.output_every && x.outdir == y.outdir;
    }
};

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {"nx",         "ny",         "lx",      "ly",      "a",
                                                  "b",          "m",          "eps",     "moll_radius",
                                                  "dt",         "t_end",      "picard_tol", "picard_max",
                                                  "lin_tol",    "lin_max",    "ic",      "ic_params",
                                                  "output_every", "outdir"};
    return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line;
};

inline std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

inline double to_real(const std::string& key, const Entry& e) {
    double x = 0;
    if (!parse_double(e.value, x) || !std::isfinite(x))
        throw ConfigError(at_line(e.line) + key + " must be a finite number, got '" + e.value + "'");
    return x;
}

inline int to_int(const std::string& key, const Entry& e) {
    const char* b = e.value.c_str();
    char* end = nullptr;
    const long v = std::strtol(b, &end, 10);
    if (end == b || *end != '\0' || v < -1000000000L || v > 1000000000L)
        throw ConfigError(at_line(e.line) + key + " must be an integer, got '" + e.value + "'");
    return static_cast<int>(v);
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using detail::at_line;
    std::map<std::string, detail::Entry> kv;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at_line(lineno) + "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        bool known = false;
        for (const auto& k : config_keys()) known = known || k == key;
        if (!known) throw ConfigError(at_line(lineno) + "unknown key '" + key + "'");
        if (kv.count(key)) throw ConfigError(at_line(lineno) + "duplicate key '" + key + "'");
        kv[key] = {val, lineno};
    }
    for (const char* req : {"nx", "ny", "a", "b", "m", "dt", "t_end", "ic"})
        if (!kv.count(req)) throw ConfigError(std::string("missing required key '") + req + "'");

    RunConfig c;
    auto has = [&](const char* k) { return kv.count(k) > 0; };
    auto real = [&](const char* k) { return detail::to_real(k, kv.at(k)); };
    auto integer = [&](const char* k) { return detail::to_int(k, kv.at(k)); };
    auto line_of = [&](const char* k) { return kv.at(k).line; };

    c.grid.nx = integer("nx");
    c.grid.ny = integer("ny");
    if (c.grid.nx < 3) throw ConfigError(at_line(line_of("nx")) + "nx must be >= 3");
    if (c.grid.ny < 3) throw ConfigError(at_line(line_of("ny")) + "ny must be >= 3");
    if (has("lx")) c.grid.lx = real("lx");
    if (has("ly")) c.grid.ly = real("ly");
    if (!(c.grid.lx > 0.0)) throw ConfigError(at_line(line_of("lx")) + "lx must be positive");
    if (!(c.grid.ly > 0.0)) throw ConfigError(at_line(line_of("ly")) + "ly must be positive");

    c.phys.a = real("a");
    c.phys.b = real("b");
    c.phys.m = real("m");
    if (!(c.phys.a > 0.0)) throw ConfigError(at_line(line_of("a")) + "a must be positive");
    if (!(c.phys.m > 0.0)) throw ConfigError(at_line(line_of("m")) + "m must be positive");
    if (!(c.phys.b > c.phys.a))
        throw ConfigError(at_line(line_of("b")) + "b must be greater than a (b > a), got b = " +
                          kv.at("b").value + ", a = " + kv.at("a").value);

    if (has("eps")) {
        c.reg.eps = real("eps");
        if (!(c.reg.eps > 0.0)) throw ConfigError(at_line(line_of("eps")) + "eps must be positive");
    }
    if (has("moll_radius")) {
        c.reg.moll_radius = real("moll_radius");
        if (!(c.reg.moll_radius >= 0.0))
            throw ConfigError(at_line(line_of("moll_radius")) + "moll_radius must be >= 0");
    }

    if (kv.at("dt").value == "auto") {
        c.dt = std::min(c.grid.hx(), c.grid.hy());
    } else {
        c.dt = real("dt");
        if (!(c.dt > 0.0)) throw ConfigError(at_line(line_of("dt")) + "dt must be positive");
    }
    c.t_end = real("t_end");
    if (!(c.t_end >= c.dt)) throw ConfigError(at_line(line_of("t_end")) + "t_end must be >= dt");

    if (has("picard_tol")) c.picard_tol = real("picard_tol");
    if (has("picard_max")) c.picard_max = integer("picard_max");
    if (has("lin_tol")) c.lin_tol = real("lin_tol");
    if (has("lin_max")) c.lin_max = integer("lin_max");
    if (!(c.picard_tol > 0.0)) throw ConfigError(at_line(line_of("picard_tol")) + "picard_tol must be positive");
    if (!(c.lin_tol > 0.0)) throw ConfigError(at_line(line_of("lin_tol")) + "lin_tol must be positive");
    if (c.picard_max < 1) throw ConfigError(at_line(line_of("picard_max")) + "picard_max must be >= 1");
    if (c.lin_max < 1) throw ConfigError(at_line(line_of("lin_max")) + "lin_max must be >= 1");

    c.ic = kv.at("ic").value;
    if (c.ic.empty()) throw ConfigError(at_line(line_of("ic")) + "ic must not be empty");
    if (has("ic_params")) c.ic_params = kv.at("ic_params").value;
    if (has("output_every")) {
        c.output_every = integer("output_every");
        if (c.output_every < 1) throw ConfigError(at_line(line_of("output_every")) + "output_every must be >= 1");
    }
    if (has("outdir")) c.outdir = kv.at("outdir").value;
    return c;
}

inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream os;
    auto r = [](double x) { return format_g17(x); };
    os << "nx = " << c.grid.nx << "\n"
       << "ny = " << c.grid.ny << "\n"
       << "lx = " << r(c.grid.lx) << "\n"
       << "ly = " << r(c.grid.ly) << "\n"
       << "a = " << r(c.phys.a) << "\n"
       << "b = " << r(c.phys.b) << "\n"
       << "m = " << r(c.phys.m) << "\n"
       << "eps = " << r(c.reg.eps) << "\n"
       << "moll_radius = " << r(c.reg.moll_radius) << "\n"
       << "dt = " << r(c.dt) << "\n"
       << "t_end = " << r(c.t_end) << "\n"
       << "picard_tol = " << r(c.picard_tol) << "\n"
       << "picard_max = " << c.picard_max << "\n"
       << "lin_tol = " << r(c.lin_tol) << "\n"
       << "lin_max = " << c.lin_max << "\n"
       << "ic = " << c.ic << "\n"
       << "ic_params = " << c.ic_params << "\n"
       << "output_every = " << c.output_every << "\n"
       << "outdir = " << c.outdir << "\n";
    return os.str();
}

}  // namespace dispflow
