#pragma once

// Initial-condition presets; any other selector is read as a snapshot CSV path.

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "io.hpp"

namespace dispflow {

/// Parses "name=value name=value ..." and rejects names outside `allowed`.
inline std::map<std::string, double> parse_ic_params(const std::string& text, const std::set<std::string>& allowed,
                                                     const std::string& preset) {
    std::map<std::string, double> out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("ic_params: expected name=value, got '" + tok + "'");
        const std::string name = tok.substr(0, eq);
        double v = 0;
        if (!detail::parse_double(tok.substr(eq + 1), v) || !std::isfinite(v))
            throw ConfigError("ic_params: bad number in '" + tok + "'");
        if (!allowed.count(name)) throw ConfigError("ic_params: '" + name + "' is not a parameter of " + preset);
        out[name] = v;
    }
    return out;
}

inline ScalarField initial_condition(const std::string& selector, const std::string& params, const GridSpec& g) {
    g.validate();
    auto get = [](const std::map<std::string, double>& p, const char* k, double dflt) {
        const auto it = p.find(k);
        return it == p.end() ? dflt : it->second;
    };
    if (selector == "constant") {
        const auto p = parse_ic_params(params, {"value"}, selector);
        const double c = get(p, "value", 1.0);
        return ScalarField(g, c);
    }
    if (selector == "gaussian") {
        const auto p = parse_ic_params(params, {"cx", "cy", "width", "amp"}, selector);
        const double cx = get(p, "cx", g.x1_min + 0.5 * g.lx), cy = get(p, "cy", g.x2_min + 0.5 * g.ly);
        const double w = get(p, "width", 0.1), amp = get(p, "amp", 1.0);
        if (!(w > 0.0)) throw ConfigError("gaussian width must be positive");
        return sample(g, [&](double x, double y) {
            const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            return amp * std::exp(-r2 / (2.0 * w * w));
        });
    }
    if (selector == "stripe") {
        const auto p = parse_ic_params(params, {"cx", "width", "amp"}, selector);
        const double cx = get(p, "cx", g.x1_min + 0.5 * g.lx);
        const double w = get(p, "width", 0.1), amp = get(p, "amp", 1.0);
        if (!(w > 0.0)) throw ConfigError("stripe width must be positive");
        return sample(g, [&](double x, double) { return amp * std::exp(-(x - cx) * (x - cx) / (2.0 * w * w)); });
    }
    if (selector == "cosine-checker") {
        const auto p = parse_ic_params(params, {"kx", "ky", "amp"}, selector);
        const double kx = get(p, "kx", 2.0), ky = get(p, "ky", 2.0), amp = get(p, "amp", 1.0);
        const double pi = std::numbers::pi;
        return sample(g, [&](double x, double y) {
            return amp * std::cos(kx * pi * (x - g.x1_min) / g.lx) * std::cos(ky * pi * (y - g.x2_min) / g.ly);
        });
    }
    if (!params.empty()) throw ConfigError("ic_params given for a file initial condition");
    return read_field_csv(selector, g);
}

}  // namespace dispflow
