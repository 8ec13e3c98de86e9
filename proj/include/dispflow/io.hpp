#pragma once

// Grid snapshot CSV: header x1,x2,value then one row per node, row-major.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "grid.hpp"

namespace dispflow {

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Shortest text that reads back to the same double (0.1 -> "0.1").
inline std::string format_shortest(double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline void write_field_csv(std::ostream& os, const ScalarField& f) {
    const GridSpec& g = f.grid;
    os << "x1,x2,value\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            os << format_g17(g.x1(i)) << ',' << format_g17(g.x2(j)) << ',' << format_g17(f(i, j)) << '\n';
}

inline void write_field_csv(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_field_csv(os, f);
    if (!os) throw Error("write failed: " + path);
}

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    const char* b = s.c_str();
    char* e = nullptr;
    out = std::strtod(b, &e);
    if (e == b) return false;
    while (*e == ' ' || *e == '\t' || *e == '\r') ++e;
    return *e == '\0';
}

}  // namespace detail

/// Read a snapshot written for grid g; coordinates are checked against the grid.
inline ScalarField read_field_csv(std::istream& is, const GridSpec& g, const std::string& name = "field") {
    g.validate();
    std::string line;
    if (!std::getline(is, line)) throw GridError(name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x1,x2,value") throw GridError(name + ": expected header 'x1,x2,value'");
    ScalarField f(g);
    const double tol1 = 1e-9 * std::max(1.0, std::abs(g.x1_min) + g.lx);
    const double tol2 = 1e-9 * std::max(1.0, std::abs(g.x2_min) + g.ly);
    std::size_t k = 0;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (k >= g.size()) throw GridError(name + ": more rows than grid nodes (" + std::to_string(g.size()) + ")");
        std::stringstream ss(line);
        std::string c[3];
        for (auto& s : c)
            if (!std::getline(ss, s, ','))
                throw GridError(name + ": line " + std::to_string(lineno) + ": expected 3 columns");
        double x1 = 0, x2 = 0, val = 0;
        if (!detail::parse_double(c[0], x1) || !detail::parse_double(c[1], x2) || !detail::parse_double(c[2], val))
            throw GridError(name + ": line " + std::to_string(lineno) + ": malformed number");
        const int i = static_cast<int>(k % static_cast<std::size_t>(g.nx));
        const int j = static_cast<int>(k / static_cast<std::size_t>(g.nx));
        if (std::abs(x1 - g.x1(i)) > tol1 || std::abs(x2 - g.x2(j)) > tol2)
            throw GridError(name + ": line " + std::to_string(lineno) + ": coordinates do not match grid node (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
        if (!std::isfinite(val)) throw GridError(name + ": line " + std::to_string(lineno) + ": non-finite value");
        f[k++] = val;
    }
    if (k != g.size())
        throw GridError(name + ": " + std::to_string(k) + " rows, grid has " + std::to_string(g.size()) + " nodes");
    return f;
}

inline ScalarField read_field_csv(const std::string& path, const GridSpec& g) {
    std::ifstream is(path);
    if (!is) throw GridError("cannot open " + path);
    return read_field_csv(is, g, path);
}

}  // namespace dispflow
