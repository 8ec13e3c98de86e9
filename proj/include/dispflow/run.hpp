#pragma once

// Time loop, per-step diagnostics and trajectory files.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "initial.hpp"
#include "io.hpp"
#include "transport.hpp"

namespace dispflow {

struct Diagnostics {
    int step = 0;
    double t = 0.0;
    double umax = 0.0, umin = 0.0;
    double mass = 0.0;
    double l2sq = 0.0;           // integral of u^2
    double energy_dissip = 0.0;  // running sum of dt * discrete integral of D grad u . grad u
    double grad_sup = 0.0;
    double phi_max = 0.0;        // max of D grad u . grad u
    double ut_sup = 0.0;         // max |u_n+1 - u_n| / dt
    int picard_iters = 0;
    double picard_gap = 0.0;
    double mass_drift = 0.0;     // |mass - mass_0| relative to the initial mass scale
};

inline const char* diagnostics_header() {
    return "step,t,umax,umin,mass,l2sq,energy_dissip,grad_sup,phi_max,ut_sup,picard_iters,picard_gap,mass_drift";
}

inline std::string diagnostics_row(const Diagnostics& d) {
    std::string s = std::to_string(d.step);
    for (double x : {d.t, d.umax, d.umin, d.mass, d.l2sq, d.energy_dissip, d.grad_sup, d.phi_max, d.ut_sup})
        s += "," + format_g17(x);
    s += "," + std::to_string(d.picard_iters);
    s += "," + format_g17(d.picard_gap) + "," + format_g17(d.mass_drift);
    return s;
}

/// Field summaries that do not depend on the step history.
inline void fill_state_diagnostics(const SimState& s, Diagnostics& d) {
    d.step = s.step;
    d.t = s.t;
    d.umax = max_value(s.u);
    d.umin = min_value(s.u);
    d.mass = integrate(s.u);
    ScalarField sq = s.u;
    for (double& x : sq.values) x *= x;
    d.l2sq = integrate(sq);
    const VectorField g = gradient(s.u);
    d.grad_sup = 0.0;
    d.phi_max = 0.0;
    for (std::size_t k = 0; k < s.u.grid.size(); ++k) {
        const Vec2 gu = g.at(k);
        d.grad_sup = std::max(d.grad_sup, norm(gu));
        d.phi_max = std::max(d.phi_max, s.D_eps.at(k).quad(gu));
    }
}

/// Mass scale used for drift: |mass_0|, or the L1 norm when the initial mass is (nearly) zero.
inline double mass_scale(const ScalarField& u0) {
    const double m = std::abs(integrate(u0));
    ScalarField a = u0;
    for (double& x : a.values) x = std::abs(x);
    const double l1 = integrate(a);
    if (m > 1e-12 * l1) return m;
    return l1 > 0.0 ? l1 : 1.0;
}

inline std::string snapshot_name(const char* prefix, int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%06d.csv", prefix, step);
    return buf;
}

struct RunResult {
    std::vector<Diagnostics> rows;
    std::vector<StepReport> reports;
    SimState final_state;
};

/// Integrates from t = 0 to t_end. When outdir is non-empty, writes the resolved config,
/// diagnostics.csv (flushed per step) and snapshots there. A failing step leaves the files
/// written so far in place and rethrows.
inline RunResult run_simulation(const RunConfig& cfg, const std::filesystem::path& outdir = {}) {
    cfg.validate();
    const bool write = !outdir.empty();
    std::ofstream diag;
    if (write) {
        std::filesystem::create_directories(outdir);
        std::ofstream(outdir / "config.txt") << serialize_config(cfg);
        diag.open(outdir / "diagnostics.csv");
        if (!diag) throw Error("cannot write " + (outdir / "diagnostics.csv").string());
        diag << diagnostics_header() << '\n';
    }
    auto snapshot = [&](const SimState& s) {
        if (!write) return;
        write_field_csv((outdir / snapshot_name("u", s.step)).string(), s.u);
        write_field_csv((outdir / snapshot_name("v", s.step)).string(), s.v);
    };

    CoupledSolver solver(cfg);
    const ScalarField u0 = initial_condition(cfg.ic, cfg.ic_params, cfg.grid);
    RunResult res;
    SimState st = solver.make_state(u0, 0.0, 0);
    const double m0 = integrate(u0), scale = mass_scale(u0);

    Diagnostics d;
    fill_state_diagnostics(st, d);
    res.rows.push_back(d);
    if (write) diag << diagnostics_row(d) << '\n' << std::flush;
    snapshot(st);

    const int nsteps = std::max(1, static_cast<int>(std::ceil(cfg.t_end / cfg.dt - 1e-9)));
    double dissip = 0.0;
    for (int n = 0; n < nsteps; ++n) {
        const double dt = (n == nsteps - 1) ? cfg.t_end - st.t : cfg.dt;
        auto [next, rep] = solver.step(st, dt);
        dissip += dt * rep.dissipation;
        Diagnostics dn;
        fill_state_diagnostics(next, dn);
        dn.energy_dissip = dissip;
        dn.ut_sup = max_abs_diff(next.u, st.u) / dt;
        dn.picard_iters = rep.picard_iterations;
        dn.picard_gap = rep.picard_gap;
        dn.mass_drift = std::abs(dn.mass - m0) / scale;
        res.rows.push_back(dn);
        res.reports.push_back(rep);
        if (write) diag << diagnostics_row(dn) << '\n' << std::flush;
        st = std::move(next);
        if (st.step % cfg.output_every == 0 || n == nsteps - 1) snapshot(st);
    }
    res.final_state = std::move(st);
    return res;
}

}  // namespace dispflow
