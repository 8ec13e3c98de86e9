#pragma once

// Manufactured-solution convergence studies for the Poisson solve and the coupled system.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "elliptic.hpp"
#include "identities.hpp"
#include "stencil.hpp"
#include "transport.hpp"

namespace dispflow {

struct MmsLevel {
    int n = 0;  // nodes per side
    double h = 0.0;
    double error = 0.0;    // max-norm error of the primary unknown
    double error_v = 0.0;  // coupled case: max-norm error of the stream function
    int steps = 0;
};

struct MmsResult {
    std::string name;
    std::vector<MmsLevel> levels;
    std::vector<double> orders;  // log2 of successive error ratios
    double slope = 0.0;          // least-squares slope of log(error) against log(h)
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw Error("need at least two points for a slope");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline void finish_orders(MmsResult& r) {
    std::vector<double> hs, es;
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        hs.push_back(r.levels[i].h);
        es.push_back(r.levels[i].error);
        if (i > 0) r.orders.push_back(std::log(r.levels[i - 1].error / r.levels[i].error) /
                                      std::log(r.levels[i - 1].h / r.levels[i].h));
    }
    r.slope = loglog_slope(hs, es);
}

/// Grids with 2^(k + base_pow) + 1 nodes per side for k = 0 .. levels-1.
inline std::vector<int> mms_sizes(int levels, int base_pow) {
    if (levels < 2) throw ConfigError("levels must be >= 2");
    if (base_pow + levels > 12) throw ConfigError("too many levels");
    std::vector<int> n;
    for (int k = 0; k < levels; ++k) n.push_back((1 << (k + base_pow)) + 1);
    return n;
}

/// v = sin(pi x1) sin(pi x2), u = 2 pi cos(pi x1) sin(pi x2), so Laplacian v = u_x1.
/// Solves with right-hand side diff_x1(u) on 17^2, 33^2, ...
inline MmsResult poisson_mms(int levels) {
    const double pi = std::numbers::pi;
    MmsResult r;
    r.name = "poisson";
    for (int n : mms_sizes(levels, 4)) {
        const GridSpec g = unit_grid(n);
        const ScalarField u = sample(g, [&](double x, double y) { return 2.0 * pi * std::cos(pi * x) * std::sin(pi * y); });
        const ScalarField v = sample(g, [&](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
        const PoissonResult pr = solve_poisson(diff_x1(u), 1e-12, 10000);
        if (!pr.report.converged) throw SolverError("Poisson solve did not converge in the convergence study");
        r.levels.push_back({n, g.hx(), max_abs_diff(pr.v, v), 0.0, 0});
    }
    finish_orders(r);
    return r;
}

/// Settings of the coupled study. The stream function vanishes on the boundary, so its gradient
/// vanishes somewhere inside; eps is kept large enough that D_eps stays smooth there.
struct CoupledMmsSettings {
    PhysParams phys{1.0, 2.0, 0.5};
    double eps = 1e-2;
    double t_end = 0.02;
    double fd_step = 1e-3;  // step of the nested differences that build the sources
};

/// u* = 1 + 0.5 cos(pi x1) cos(pi x2) e^{-t} (zero normal derivative), v* = (1 + t) sin(pi x1) sin(pi x2)
/// (zero on the boundary, so q* is tangential there and the co-normal flux of u* vanishes).
/// Sources are built by differencing the analytic fields; dt = h^2 on grids 9^2, 17^2, ...
inline MmsResult coupled_mms(int levels, const CoupledMmsSettings& s = {}) {
    const double pi = std::numbers::pi;
    const SpaceTimeFn us = [pi](double x, double y, double t) {
        return 1.0 + 0.5 * std::cos(pi * x) * std::cos(pi * y) * std::exp(-t);
    };
    const SpaceTimeFn vs = [pi](double x, double y, double t) {
        return (1.0 + t) * std::sin(pi * x) * std::sin(pi * y);
    };
    const double k = s.fd_step;
    const PhysParams phys = s.phys;
    const double eps = s.eps;
    Forcing forcing;
    forcing.fu = [=](double x, double y, double t) {
        auto gu = [&](const Vec2& p) { return fd::grad([&](const Vec2& z) { return us(z.x1, z.x2, t); }, p, k); };
        auto qf = [&](const Vec2& p) {
            const Vec2 gv = fd::grad([&](const Vec2& z) { return vs(z.x1, z.x2, t); }, p, k);
            return Vec2{-gv.x2, gv.x1};
        };
        auto flux = [&](const Vec2& p) { return dispersion_tensor_eps(qf(p), phys, eps) * gu(p); };
        const Vec2 x0{x, y};
        const double ut = fd::d1([&](const Vec2& z) { return us(x, y, z.x1); }, Vec2{t, 0.0}, 0, k);
        return ut - fd::div(flux, x0, k) + dot(gu(x0), qf(x0));
    };
    forcing.fv = [=](double x, double y, double t) {
        const Vec2 x0{x, y};
        auto vf = [&](const Vec2& z) { return vs(z.x1, z.x2, t); };
        const double lap = fd::d2(vf, x0, 0, k) + fd::d2(vf, x0, 1, k);
        return lap - fd::d1([&](const Vec2& z) { return us(z.x1, z.x2, t); }, x0, 0, k);
    };

    MmsResult r;
    r.name = "coupled";
    for (int n : mms_sizes(levels, 3)) {
        RunConfig cfg;
        cfg.grid = unit_grid(n);
        cfg.phys = phys;
        cfg.reg.eps = eps;
        const double h = cfg.grid.hx();
        cfg.dt = h * h;
        cfg.t_end = s.t_end;
        cfg.ic = "manufactured";
        cfg.picard_tol = 1e-11;
        CoupledSolver solver(cfg, &forcing);
        SimState st = solver.make_state(sample(cfg.grid, [&](double x, double y) { return us(x, y, 0.0); }), 0.0, 0);
        const int nsteps = static_cast<int>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
        for (int i = 0; i < nsteps; ++i) {
            const double dt = (i == nsteps - 1) ? cfg.t_end - st.t : cfg.dt;
            st = solver.step(st, dt).first;
        }
        const double t = st.t;
        MmsLevel lv{n, h, 0.0, 0.0, nsteps};
        lv.error = max_abs_diff(st.u, sample(cfg.grid, [&](double x, double y) { return us(x, y, t); }));
        lv.error_v = max_abs_diff(st.v, sample(cfg.grid, [&](double x, double y) { return vs(x, y, t); }));
        r.levels.push_back(lv);
    }
    finish_orders(r);
    return r;
}

}  // namespace dispflow
