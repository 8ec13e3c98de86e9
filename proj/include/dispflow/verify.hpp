#pragma once

// Verification suites behind the `verify` command: one row per identity or property.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "elliptic.hpp"
#include "identities.hpp"
#include "mapped.hpp"
#include "mms.hpp"
#include "transport.hpp"

namespace dispflow {

struct VerifyRow {
    std::string suite;
    std::string name;
    long trials = 1;
    double value = 0.0;  // worst residual (or smallest ratio for lower-bound rows)
    double threshold = 0.0;
    bool lower_bound = false;  // pass when value >= threshold instead of value <= threshold

    bool pass() const { return lower_bound ? value >= threshold : value <= threshold; }
    const char* relation() const { return lower_bound ? ">=" : "<="; }
};

inline bool all_pass(const std::vector<VerifyRow>& rows) {
    for (const auto& r : rows)
        if (!r.pass()) return false;
    return true;
}

// ---------------------------------------------------------------- random inputs

inline Sym2 random_sym2(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    const double a = u(rng), b = u(rng), c = u(rng);
    return {a, b, c};
}

/// Symmetric positive-definite matrix with eigenvalues in [lo, hi] and a random orientation.
inline Sym2 random_spd(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> ev(lo, hi), ang(0.0, std::numbers::pi);
    const double l1 = ev(rng), l2 = ev(rng), th = ang(rng);
    const double c = std::cos(th), s = std::sin(th);
    return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

/// Sum of a few random Fourier modes with unit total amplitude.
inline ScalarField random_smooth_field(const GridSpec& g, std::mt19937_64& rng, int modes = 6) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScalarField f(g, 0.0);
    for (int m = 0; m < modes; ++m) {
        const double kx = 1.0 + 7.0 * u(rng), ky = 1.0 + 7.0 * u(rng);
        const double px = 2.0 * std::numbers::pi * u(rng), py = 2.0 * std::numbers::pi * u(rng);
        const double amp = (2.0 * u(rng) - 1.0) / modes;
        f += sample(g, [&](double x, double y) { return amp * std::sin(kx * x + px) * std::cos(ky * y + py); });
    }
    return f;
}

// ---------------------------------------------------------------- suites

namespace detail {

/// Gaussian elimination with partial pivoting on a 3x3 system.
inline void solve3(double a[3][3], double b[3], double x[3]) {
    for (int c = 0; c < 3; ++c) {
        int p = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        for (int k = 0; k < 3; ++k) std::swap(a[c][k], a[p][k]);
        std::swap(b[c], b[p]);
        for (int r = c + 1; r < 3; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < 3; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
}

/// Consistent reconstruction input from a chosen Hessian.
inline CramerInput consistent_cramer_input(const Sym2& d, const Sym2& hess, const Vec2& grad_u, const Vec2& g) {
    CramerInput in;
    in.D = d;
    in.grad_u = grad_u;
    in.G = g;
    in.phi = d.quad(grad_u);
    in.grad_phi = 2.0 * (hess * (d * grad_u)) + in.phi * g;
    in.ut_minus_w = contract(d, hess);
    return in;
}

inline PsiStudy psi_reference_study(int j, int n) {
    PsiStudy s;
    s.u = [](double x, double y, double t) { return x + 0.2 * std::sin(x + y) * std::exp(-t); };
    s.v = [](double x, double y, double) {
        return 0.1 * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    };
    s.phys = PhysParams{1.0, 2.0, 0.5};
    s.j = j;
    s.grid = unit_grid(n + 1);
    return s;
}

}  // namespace detail

inline std::vector<VerifyRow> verify_identities(unsigned seed) {
    std::vector<VerifyRow> rows;
    std::mt19937_64 rng(seed);
    const std::string S = "identities";

    {
        double worst = 0.0;
        const long n = 10000;
        for (long t = 0; t < n; ++t) {
            const Sym2 a = random_sym2(rng, -10.0, 10.0);
            const double na = std::sqrt(contract(a, a));
            worst = std::max(worst, sym2_decompose_check(a) / (1.0 + na * na));
        }
        rows.push_back({S, "matrix_decomposition", n, worst, 1e-12});
    }
    {
        double worst = 0.0;
        const long n = 10000;
        for (long t = 0; t < n; ++t) {
            const Sym2 d = random_spd(rng, 0.1, 10.0), s = random_sym2(rng, -10.0, 10.0);
            worst = std::max(worst, sds_identity_check(d, s) / sds_scale(d, s));
        }
        rows.push_back({S, "sds_identity", n, worst, 1e-10});
    }
    {
        double worst_h = 0.0, worst_det = 0.0;
        const long n = 1000;
        std::uniform_real_distribution<double> g(-1.0, 1.0), mag(0.5, 2.0), ang(0.0, 2.0 * std::numbers::pi);
        for (long t = 0; t < n; ++t) {
            const Sym2 d = random_spd(rng, 0.5, 10.0), hs = random_sym2(rng, -5.0, 5.0);
            const double r = mag(rng), th = ang(rng);
            const Vec2 gu{r * std::cos(th), r * std::sin(th)}, gg{g(rng), g(rng)};
            const CramerInput in = detail::consistent_cramer_input(d, hs, gu, gg);
            const CramerResult cr = cramer_hessian(in);
            double e[3][3], rhs[3], x[3];
            cramer_system(in, e, rhs);
            detail::solve3(e, rhs, x);
            const Sym2 direct{x[0], x[1], x[2]};
            worst_h = std::max(worst_h, max_abs(cr.hessian - direct) / max_abs(direct));
            worst_det = std::max(worst_det, std::abs(cr.det_E - cr.det_D_phi) / std::abs(cr.det_D_phi));
        }
        rows.push_back({S, "cramer_vs_direct_solve", n, worst_h, 1e-12});
        rows.push_back({S, "cramer_det_E", n, worst_det, 1e-10});
    }
    {
        IdentityWorkspace ws;
        ws.D = dispersion_tensor({3.0, 4.0}, PhysParams{1.0, 2.0, 0.5});
        ws.grad_u = {1.0, -0.5};
        const HFh c = assemble_HFh(ws);
        rows.push_back({S, "coefficients_constant_tensor_zero", 1,
                        std::max({max_abs(c.H), max_abs(c.F), std::abs(c.h)}), 1e-14});
    }
    {
        double worst = 0.0;
        const int n = 20;
        for (int t = 0; t < n; ++t) {
            IdentityWorkspace ws;
            ws.D = random_spd(rng, 0.5, 5.0);
            ws.D_t = random_sym2(rng, -1.0, 1.0);
            ws.D_x1 = random_sym2(rng, -1.0, 1.0);
            ws.D_x2 = random_sym2(rng, -1.0, 1.0);
            ws.grad_u = {1.0 + std::uniform_real_distribution<double>(0.0, 1.0)(rng), 0.5};
            ws.u_t = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
            ws.w = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
            worst = std::max(worst, hfh_relative_sensitivity(ws, 1e-7, 20, seed + t));
        }
        rows.push_back({S, "coefficients_sensitivity", n * 20, worst, 1e3});
    }
    for (int j : {1, 2}) {
        const double r40 = psi_equation_residual(detail::psi_reference_study(j, 40)).max_residual;
        const double r80 = psi_equation_residual(detail::psi_reference_study(j, 80)).max_residual;
        rows.push_back({S, "psi_equation_ratio_j" + std::to_string(j), 2, r40 / r80, 3.0, true});
    }
    {
        VectorCalcFields f;
        f.F = [](double x, double y) { return Vec2{std::sin(2 * x + y), std::cos(x * y)}; };
        f.G = [](double x, double y) { return Vec2{std::exp(0.5 * x) * y, std::sin(x - 2 * y)}; };
        f.A = [](double x, double y) { return Mat2{2.0 + std::sin(x + y), 0.3 * std::cos(x * y), x - y, 2.0 + x * y}; };
        f.u = [](double x, double y) { return std::sin(x) * std::cos(2 * y) + x * x * y; };
        const GridSpec g1 = unit_grid(33), g2 = unit_grid(65);
        const double e1 = vector_calc_checks(f, g1).max(), e2 = vector_calc_checks(f, g2).max();
        rows.push_back({S, "vector_calculus_ratio", 2, e1 / e2, 3.0, true});
    }
    {
        long fails = 0;
        const long n = 1000;
        std::uniform_real_distribution<double> c(0.5, 10.0), b(1.1, 10.0), al(0.25, 2.0), th(0.05, 0.99);
        for (long t = 0; t < n; ++t) {
            RecursionParams p{c(rng), b(rng), al(rng), 0.0};
            p.y0 = th(rng) * p.threshold();
            if (!degiorgi_limit(p, 400).converged) ++fails;
        }
        rows.push_back({S, "recursion_below_threshold_failures", n, static_cast<double>(fails), 0.0});
        const RecursionResult r = degiorgi_limit({1.0, 2.0, 1.0, 0.5}, 60);
        rows.push_back({S, "recursion_worked_case_y60", 1, r.sequence.back(), 1e-12});
    }
    {
        const GridSpec g = unit_grid(401);
        const ScalarField one(g, 1.0);
        double worst_ratio = 0.0, bound = 0.0, prev = -1.0;
        for (double r : {0.2, 0.1, 0.05, 0.025}) {
            const double eta = kato_eta(one, r, {0.5, 0.5}).eta;
            if (prev > 0.0) worst_ratio = std::max(worst_ratio, eta / prev);
            bound = std::max(bound, eta / std::pow(r, 1.9));
            prev = eta;
        }
        rows.push_back({S, "log_kernel_successive_ratio", 4, worst_ratio, 1.0 - 1e-12});
        // sup over r of pi r^0.1 (ln(1/r) + 1/2) is 10 pi e^{-0.95}
        rows.push_back({S, "log_kernel_scaled_bound", 4, bound, 10.0 * std::numbers::pi * std::exp(-0.95)});
    }
    return rows;
}

inline std::vector<VerifyRow> verify_appendix(unsigned seed) {
    std::vector<VerifyRow> rows;
    const std::string S = "appendix";
    for (const Diffeo& d : {identity_diffeo(), shear_diffeo(), exponential_diffeo()}) {
        const auto pts = chart_samples(d, 1000, seed);
        rows.push_back({S, "jacobian_identity_" + d.name, 1000, jacobian_identity_check(d, pts), 1e-12});
        rows.push_back({S, "jacobian_det_" + d.name, 1000, jacobian_det_check(d, pts), 1e-12});
    }
    const Diffeo ex = exponential_diffeo();
    {
        auto grad_u = [](const Vec2& x) { return Vec2{std::cos(x.x1) * x.x2, std::sin(x.x1)}; };
        auto grad_ut = [](const Vec2& e) {
            const double s = e.x1 * std::exp(-e.x2);
            return Vec2{std::cos(s) * std::exp(-e.x2) * e.x2, -std::cos(s) * s * e.x2 + std::sin(s)};
        };
        rows.push_back({S, "pushforward_gradient_exponential", 1000,
                        pushforward_gradient_check(ex, grad_u, grad_ut, chart_samples(ex, 1000, seed + 1)), 1e-10});
    }
    auto vp = [](double a, double b) { return std::sin(a) * std::cos(b) + a * a * b; };
    auto up = [](double a, double b) { return 2.0 * std::cos(a) * std::cos(b) + 2.0 * a * b; };
    {
        const double e1 = max_abs_interior(transformed_poisson_residual(ex, vp, up, ex.chart_grid(33)), 2);
        const double e2 = max_abs_interior(transformed_poisson_residual(ex, vp, up, ex.chart_grid(65)), 2);
        rows.push_back({S, "transformed_poisson_ratio_exponential", 2, e1 / e2, 3.0, true});
    }
    const PhysParams p{1.0, 2.0, 0.5};
    const SpaceTimeFn ut = [](double x, double y, double t) { return std::sin(x + 0.5 * y) * std::exp(-t) + x * y; };
    const SpaceTimeFn vt = [](double x, double y, double t) { return (x + y + 0.3 * x * y) * (1.0 + 0.5 * t); };
    {
        auto res = [&](int n) {
            return max_abs_interior(transformed_transport_residual(ex, ut, vt, p, ex.chart_grid(n), 0.3,
                                                                   ex.chart.lx / (n - 1)),
                                    2);
        };
        rows.push_back({S, "transformed_transport_ratio_exponential", 2, res(33) / res(65), 3.0, true});
    }
    {
        const Diffeo sh = shear_diffeo();
        const SpaceTimeFn us = [](double x, double, double t) { return x * x * std::exp(-t); };
        const SpaceTimeFn vs = [](double x, double y, double) { return x * y; };
        auto res = [&](int n) {
            return max_abs_interior(transformed_transport_residual(sh, us, vs, p, sh.chart_grid(n), 0.3,
                                                                   sh.chart.lx / (n - 1)),
                                    2);
        };
        rows.push_back({S, "transformed_transport_ratio_shear", 2, res(33) / res(65), 3.0, true});
    }
    {
        const Diffeo id = identity_diffeo();
        const GridSpec g = id.chart_grid(33);
        const ScalarField a = transformed_transport_expression(id, ut, vt, p, g, 0.3, g.hx());
        const ScalarField b = untransformed_transport_expression(ut, vt, p, g, 0.3, g.hx());
        rows.push_back({S, "identity_chart_bitwise", 1, max_abs_diff(a, b), 0.0});
    }
    {
        const ChartFields c = build_chart_fields(ex, up, vp, p, ex.chart_grid(33));
        rows.push_back({S, "transformed_tensor_lower_eig_ratio", 33 * 33, c.min_eig_ratio, 1.0 - 1e-12, true});
        rows.push_back({S, "transformed_tensor_upper_eig_ratio", 33 * 33, c.max_eig_ratio, 1.0 + 1e-12});
    }
    {
        const GridSpec g{17, 17, 0.5, 1.0, 0.0, 0.0};
        const ScalarField f = sample(g, [](double a, double b) { return a * (1.0 + b) - 0.3 * a * a; });
        const ScalarField e = reflect_extend(f, Parity::even), o = reflect_extend(f, Parity::odd);
        double mismatch = std::max(std::abs(max_abs(e) - max_abs(f)), std::abs(max_abs(o) - max_abs(f)));
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int l = g.nx - 1 - i, r = g.nx - 1 + i;
                mismatch = std::max({mismatch, std::abs(e(l, j) - f(i, j)), std::abs(e(r, j) - f(i, j)),
                                     std::abs(o(l, j) + f(i, j)), std::abs(o(r, j) - f(i, j))});
            }
        bool rejected = false;
        try {
            reflect_extend(sample(g, [](double, double b) { return 1.0 + b; }), Parity::odd);
        } catch (const DomainError&) {
            rejected = true;
        }
        rows.push_back({S, "reflection_contracts", 2, rejected ? mismatch : 1.0, 0.0});
    }
    return rows;
}

inline std::vector<VerifyRow> verify_solver(unsigned seed) {
    std::vector<VerifyRow> rows;
    std::mt19937_64 rng(seed);
    const std::string S = "solver";
    const PhysParams p{1.0, 2.0, 0.5};
    {
        const GridSpec g = unit_grid(65);
        double worst_eig = 0.0, worst_det = 0.0;
        for (int t = 0; t < 5; ++t) {
            const VectorField q = stream_velocity(random_smooth_field(g, rng));
            for (std::size_t k = 0; k < g.size(); ++k) {
                const Vec2 qk = q.at(k);
                const double s = norm(qk);
                const Sym2 d = dispersion_tensor(qk, p);
                const Vec2 ev = eigenvalues(d);
                const double lo = p.a * s + p.m, hi = p.b * s + p.m;
                worst_eig = std::max({worst_eig, std::abs(ev.x1 - lo) / lo, std::abs(ev.x2 - hi) / hi});
                worst_det = std::max(worst_det, std::abs(d.det() - lo * hi) / (lo * hi));
            }
        }
        rows.push_back({S, "dispersion_eigenvalues", 5 * 65 * 65, worst_eig, 1e-12});
        rows.push_back({S, "dispersion_determinant", 5 * 65 * 65, worst_det, 1e-12});
    }
    {
        const GridSpec g = unit_grid(129);
        double worst = 0.0, worst_rel = 0.0;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 5; ++t) {
            worst = std::max(worst, max_abs_interior(divergence(stream_velocity(random_smooth_field(g, rng)))));
            ScalarField v(g);
            for (double& x : v.values) x = u(rng);
            const VectorField q = stream_velocity(v);
            const double scale = std::max(max_abs(diff_x1(q.c1)), max_abs(diff_x2(q.c2)));
            worst_rel = std::max(worst_rel, max_abs_interior(divergence(q)) / scale);
        }
        rows.push_back({S, "div_free_velocity_smooth", 5, worst, 1e-12});
        rows.push_back({S, "div_free_velocity_noise_relative", 5, worst_rel, 1e-14});
    }
    {
        const MmsResult r = poisson_mms(4);
        rows.push_back({S, "poisson_order_deviation", 4, std::abs(r.slope - 2.0), 0.2});
    }
    {
        const GridSpec g = unit_grid(33);
        double drift = 0.0, drift_raw = 0.0, const_err = 0.0;
        for (int t = 0; t < 5; ++t) {
            const ScalarField v = solve_poisson(diff_x1(random_smooth_field(g, rng))).v;
            const VectorField q = stream_velocity(v);
            const SymTensorField d = assemble_D_eps(q, p, RegParams{});
            const ScalarField u0 = random_smooth_field(g, rng);
            drift = std::max(drift, parabolic_step(u0, d, face_flux_from_stream(v), 0.05).mass_drift);
            ParabolicOptions tight;
            tight.restore_mass = false;
            tight.lin_tol = 1e-14;
            drift_raw = std::max(drift_raw, parabolic_step(u0, d, face_flux_from_stream(v), 0.05, tight).mass_drift);
            const ParabolicResult c = parabolic_step(ScalarField(g, 2.5), d, face_flux_from_stream(v), 0.05);
            const_err = std::max(const_err, max_abs_diff(c.u, ScalarField(g, 2.5)));
        }
        rows.push_back({S, "step_mass_drift", 5, drift, 1e-11});
        rows.push_back({S, "step_mass_drift_unshifted_tight_solve", 5, drift_raw, 1e-11});
        rows.push_back({S, "step_constant_preserved", 5, const_err, 1e-12});
    }
    {
        const GridSpec g = unit_grid(33);
        const PhysParams iso{1.0, 1.0, 0.5};
        double over = 0.0;
        for (int t = 0; t < 5; ++t) {
            const ScalarField u0 = random_smooth_field(g, rng);
            const SymTensorField d = assemble_D(VectorField(g), iso);
            const ParabolicResult r = parabolic_step(u0, d, VectorField(g), 0.01);
            over = std::max({over, max_value(r.u) - max_value(u0), min_value(u0) - min_value(r.u)});
        }
        rows.push_back({S, "isotropic_step_max_principle", 5, over, 1e-10});
    }
    return rows;
}

inline std::vector<VerifyRow> run_verify(const std::string& suite, unsigned seed) {
    if (suite == "identities") return verify_identities(seed);
    if (suite == "appendix") return verify_appendix(seed);
    if (suite == "solver") return verify_solver(seed);
    if (suite == "all") {
        std::vector<VerifyRow> rows = verify_identities(seed);
        for (auto& r : verify_appendix(seed)) rows.push_back(std::move(r));
        for (auto& r : verify_solver(seed)) rows.push_back(std::move(r));
        return rows;
    }
    throw ConfigError("unknown suite '" + suite + "' (identities, appendix, solver, all)");
}

inline void print_verify_table(std::ostream& os, const std::vector<VerifyRow>& rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %-42s %8s %14s %4s %12s  %s\n", "suite", "name", "trials", "value", "",
                  "threshold", "status");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %-42s %8ld %14.6e %4s %12.4e  %s\n", r.suite.c_str(), r.name.c_str(),
                      r.trials, r.value, r.relation(), r.threshold, r.pass() ? "pass" : "FAIL");
        os << buf;
    }
}

inline void write_verify_csv(std::ostream& os, const std::vector<VerifyRow>& rows, unsigned seed) {
    os << "suite,name,trials,value,relation,threshold,status,seed\n";
    for (const auto& r : rows)
        os << r.suite << ',' << r.name << ',' << r.trials << ',' << format_g17(r.value) << ',' << r.relation() << ','
           << format_g17(r.threshold) << ',' << (r.pass() ? "pass" : "fail") << ',' << seed << '\n';
}

}  // namespace dispflow
