#pragma once

// Boundary-flattening charts: analytic diffeomorphisms, Jacobian identities, transformed
// equations on the chart rectangle, and even/odd reflection across eta1 = 0.

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "coefficients.hpp"
#include "grid.hpp"
#include "identities.hpp"
#include "stencil.hpp"

namespace dispflow {

/// Jacobians use the convention J(i, j) = d g_j / d x_i, so grad u = J_g grad u~.
struct Diffeo {
    std::string name;
    std::function<Vec2(const Vec2&)> g;      // x -> eta
    std::function<Vec2(const Vec2&)> f;      // eta -> x
    std::function<Mat2(const Vec2&)> jac_g;  // at x
    std::function<Mat2(const Vec2&)> jac_f;  // at eta
    std::function<Sym2(int, const Vec2&)> hess_g;  // second derivatives of g_k at x
    GridSpec chart;  // eta-rectangle (only the box is used; node counts are ignored)
    double c0 = 1.0, c1 = 1.0;

    bool in_chart(const Vec2& eta) const {
        const double t = 1e-12;
        return eta.x1 >= chart.x1_min - t && eta.x1 <= chart.x1_min + chart.lx + t && eta.x2 >= chart.x2_min - t &&
               eta.x2 <= chart.x2_min + chart.ly + t;
    }
    /// eta-grid on the chart with n nodes per side
    GridSpec chart_grid(int n) const { return GridSpec{n, n, chart.lx, chart.ly, chart.x1_min, chart.x2_min}; }
};

inline Diffeo identity_diffeo() {
    Diffeo d;
    d.name = "identity";
    d.g = [](const Vec2& x) { return x; };
    d.f = [](const Vec2& e) { return e; };
    d.jac_g = [](const Vec2&) { return Mat2::identity(); };
    d.jac_f = [](const Vec2&) { return Mat2::identity(); };
    d.hess_g = [](int, const Vec2&) { return Sym2{}; };
    d.chart = GridSpec{3, 3, 0.5, 1.0, 0.0, 0.5};
    d.c0 = d.c1 = 1.0;
    return d;
}

/// g(x) = (x1, x2 + 0.2 x1)
inline Diffeo shear_diffeo() {
    Diffeo d;
    d.name = "shear";
    d.g = [](const Vec2& x) { return Vec2{x.x1, x.x2 + 0.2 * x.x1}; };
    d.f = [](const Vec2& e) { return Vec2{e.x1, e.x2 - 0.2 * e.x1}; };
    d.jac_g = [](const Vec2&) { return Mat2{1.0, 0.2, 0.0, 1.0}; };
    d.jac_f = [](const Vec2&) { return Mat2{1.0, -0.2, 0.0, 1.0}; };
    d.hess_g = [](int, const Vec2&) { return Sym2{}; };
    d.chart = GridSpec{3, 3, 0.5, 1.0, 0.0, 0.5};
    d.c0 = d.c1 = 1.0;
    return d;
}

/// g(x) = (x1 e^{x2}, x2), f(eta) = (eta1 e^{-eta2}, eta2)
inline Diffeo exponential_diffeo() {
    Diffeo d;
    d.name = "exponential";
    d.g = [](const Vec2& x) { return Vec2{x.x1 * std::exp(x.x2), x.x2}; };
    d.f = [](const Vec2& e) { return Vec2{e.x1 * std::exp(-e.x2), e.x2}; };
    d.jac_g = [](const Vec2& x) {
        const double ex = std::exp(x.x2);
        return Mat2{ex, 0.0, x.x1 * ex, 1.0};
    };
    d.jac_f = [](const Vec2& e) {
        const double ex = std::exp(-e.x2);
        return Mat2{ex, 0.0, -e.x1 * ex, 1.0};
    };
    d.hess_g = [](int k, const Vec2& x) {
        if (k == 1) return Sym2{};
        const double ex = std::exp(x.x2);
        return Sym2{0.0, ex, x.x1 * ex};
    };
    d.chart = GridSpec{3, 3, 0.5, 0.5, 0.0, 0.25};
    // det J_g = e^{x2} and x2 = eta2 on the chart
    d.c0 = std::exp(0.25);
    d.c1 = std::exp(0.75);
    return d;
}

/// det J_g at f(eta) must lie in [c0, c1].
inline void check_jacobian_bounds(const Diffeo& d, const Vec2& eta) {
    const double dj = d.jac_g(d.f(eta)).det();
    if (!(dj >= d.c0 * (1.0 - 1e-12) && dj <= d.c1 * (1.0 + 1e-12)))
        throw DomainError(d.name + ": det J_g = " + std::to_string(dj) + " outside [c0, c1]");
}

inline void require_in_chart(const Diffeo& d, const Vec2& eta) {
    if (!d.in_chart(eta)) throw DomainError(d.name + ": point outside the chart");
}

/// max |J_f(eta) J_g(f(eta)) - I| over the sample points.
inline double jacobian_identity_check(const Diffeo& d, const std::vector<Vec2>& etas) {
    double r = 0.0;
    for (const Vec2& e : etas) {
        require_in_chart(d, e);
        r = std::max(r, max_abs(d.jac_f(e) * d.jac_g(d.f(e)) - Mat2::identity()));
    }
    return r;
}

/// max |det J_f(eta) det J_g(f(eta)) - 1| over the sample points.
inline double jacobian_det_check(const Diffeo& d, const std::vector<Vec2>& etas) {
    double r = 0.0;
    for (const Vec2& e : etas) {
        require_in_chart(d, e);
        r = std::max(r, std::abs(d.jac_f(e).det() * d.jac_g(d.f(e)).det() - 1.0));
    }
    return r;
}

/// Uniform random points in the chart.
inline std::vector<Vec2> chart_samples(const Diffeo& d, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(d.chart.x1_min, d.chart.x1_min + d.chart.lx);
    std::uniform_real_distribution<double> uy(d.chart.x2_min, d.chart.x2_min + d.chart.ly);
    std::vector<Vec2> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) p = {ux(rng), uy(rng)};
    return pts;
}

/// max |grad u(x) - J_g(x) grad u~(g(x))| with u~ = u o f; gradients supplied analytically.
inline double pushforward_gradient_check(const Diffeo& d, const std::function<Vec2(const Vec2&)>& grad_u,
                                         const std::function<Vec2(const Vec2&)>& grad_u_tilde,
                                         const std::vector<Vec2>& etas) {
    double r = 0.0;
    for (const Vec2& e : etas) {
        require_in_chart(d, e);
        const Vec2 x = d.f(e);
        r = std::max(r, max_abs(grad_u(x) - d.jac_g(x) * grad_u_tilde(d.g(x))));
    }
    return r;
}

/// (h1, h2) at eta: h1 = sum_{k,j} d_{x2}d_{xj} g_k d_{eta_k} f_j,  h2 = -sum_{k,j} d_{x1}d_{xj} g_k d_{eta_k} f_j.
inline Vec2 chart_h(const Diffeo& d, const Vec2& eta) {
    const Vec2 x = d.f(eta);
    const Mat2 jf = d.jac_f(eta);  // jf(k, j) = d f_j / d eta_k
    double h1 = 0.0, h2 = 0.0;
    for (int k = 0; k < 2; ++k) {
        const Sym2 hk = d.hess_g(k, x);
        const double second[2][2] = {{hk.a11, hk.a12}, {hk.a12, hk.a22}};
        for (int j = 0; j < 2; ++j) {
            h1 += second[1][j] * jf(k, j);
            h2 -= second[0][j] * jf(k, j);
        }
    }
    return {h1, h2};
}

inline Vec2 rotate(const Vec2& b) { return {-b.x2, b.x1}; }

using PlaneFn = std::function<double(double, double)>;

/// Transformed fields on an eta-grid of the chart.
struct ChartFields {
    GridSpec grid;
    ScalarField u_t, v_t;  // u~, v~
    ScalarField h1, h2;
    SymTensorField D_t;    // D~ built from q~
    SymTensorField M;      // J_g^T D~ J_g
    VectorField q_t;       // q~ = rotation of J_g grad v~
    double min_eig_ratio = 0.0;  // min over nodes of lambda_min(M) / (lambda_min(D~) sigma_min(J)^2)
    double max_eig_ratio = 0.0;  // max over nodes of lambda_max(M) / (lambda_max(D~) sigma_max(J)^2)
};

inline Vec2 singular_values_sq(const Mat2& j) { return eigenvalues(symmetric_part(j.transpose() * j)); }

inline ChartFields build_chart_fields(const Diffeo& d, const PlaneFn& u, const PlaneFn& v, const PhysParams& p,
                                      const GridSpec& eta_grid) {
    eta_grid.validate();
    ChartFields c;
    c.grid = eta_grid;
    for (int j = 0; j < eta_grid.ny; ++j)
        for (int i = 0; i < eta_grid.nx; ++i) {
            require_in_chart(d, eta_grid.node(i, j));
            check_jacobian_bounds(d, eta_grid.node(i, j));
        }
    c.u_t = sample(eta_grid, [&](double a, double b) { const Vec2 x = d.f({a, b}); return u(x.x1, x.x2); });
    c.v_t = sample(eta_grid, [&](double a, double b) { const Vec2 x = d.f({a, b}); return v(x.x1, x.x2); });
    c.h1 = ScalarField(eta_grid);
    c.h2 = ScalarField(eta_grid);
    c.D_t = SymTensorField(eta_grid);
    c.M = SymTensorField(eta_grid);
    c.q_t = VectorField(eta_grid);
    const VectorField gv = gradient(c.v_t);
    c.min_eig_ratio = std::numeric_limits<double>::infinity();
    for (int j = 0; j < eta_grid.ny; ++j)
        for (int i = 0; i < eta_grid.nx; ++i) {
            const std::size_t k = eta_grid.index(i, j);
            const Vec2 eta = eta_grid.node(i, j);
            const Mat2 jg = d.jac_g(d.f(eta));
            const Vec2 hh = chart_h(d, eta);
            c.h1[k] = hh.x1;
            c.h2[k] = hh.x2;
            const Vec2 q = rotate(jg * gv.at(k));
            c.q_t.set(k, q);
            const Sym2 dt = dispersion_tensor(q, p);
            c.D_t.set(k, dt);
            const Sym2 m = congruence(jg, dt);
            c.M.set(k, m);
            const Vec2 em = eigenvalues(m), ed = eigenvalues(dt), sj = singular_values_sq(jg);
            if (!(em.x1 > 0.0)) throw DomainError(d.name + ": transformed tensor not positive definite");
            c.min_eig_ratio = std::min(c.min_eig_ratio, em.x1 / (ed.x1 * sj.x1));
            c.max_eig_ratio = std::max(c.max_eig_ratio, em.x2 / (ed.x2 * sj.x2));
        }
    return c;
}

/// div(J^T J grad v~) + (h1, h2).q~ - (J grad u~)_1 on the eta-grid, second-order differences.
/// For u, v with Laplacian v = u_x1 this is a pure discretization error.
inline ScalarField transformed_poisson_residual(const Diffeo& d, const PlaneFn& v, const PlaneFn& u,
                                                const GridSpec& eta_grid) {
    const ChartFields c = build_chart_fields(d, u, v, PhysParams{}, eta_grid);
    const GridSpec& g = eta_grid;
    const VectorField gv = gradient(c.v_t), gu = gradient(c.u_t);
    ScalarField w1(g), w2(g), rhs(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            const Mat2 jg = d.jac_g(d.f(g.node(i, j)));
            const Vec2 w = congruence(jg, Sym2::identity()) * gv.at(k);
            w1[k] = w.x1;
            w2[k] = w.x2;
            rhs[k] = (jg * gu.at(k)).x1;
        }
    ScalarField res = diff_x1(w1);
    res += diff_x2(w2);
    for (std::size_t k = 0; k < g.size(); ++k) res[k] += c.h1[k] * c.q_t.c1[k] + c.h2[k] * c.q_t.c2[k] - rhs[k];
    return res;
}

namespace detail {

/// u_t - M : Hessian(u) - [ (div M) grad u + (h2, -h1) D J grad u - (J grad u).q ] on a grid,
/// where u_prev/u_next are u at t -/+ dt_fd and the chart data are given per node.
struct TransportChartData {
    std::vector<Mat2> jac;  // J_g at each node
    std::vector<Vec2> h;    // (h1, h2) at each node
};

inline ScalarField transport_expression(const ScalarField& u, const ScalarField& u_prev, const ScalarField& u_next,
                                        double dt_fd, const ScalarField& v, const PhysParams& p,
                                        const TransportChartData& cd) {
    const GridSpec& g = u.grid;
    const VectorField gu = gradient(u), gv = gradient(v);
    const SymTensorField hu = hessian(u);
    SymTensorField M(g), Dt(g);
    std::vector<Vec2> q(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        q[k] = rotate(cd.jac[k] * gv.at(k));
        Dt.set(k, dispersion_tensor(q[k], p));
        M.set(k, congruence(cd.jac[k], Dt.at(k)));
    }
    const ScalarField m11x = diff_x1(M.d11), m12x = diff_x1(M.d12), m12y = diff_x2(M.d12), m22y = diff_x2(M.d22);
    ScalarField out(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec2 du = gu.at(k);
        const Vec2 div_m{m11x[k] + m12y[k], m12x[k] + m22y[k]};
        const Vec2 jdu = cd.jac[k] * du;
        const Vec2 hrot{cd.h[k].x2, -cd.h[k].x1};
        const double w = dot(div_m, du) + dot(hrot, Dt.at(k) * jdu) - dot(jdu, q[k]);
        const double ut = (u_next[k] - u_prev[k]) / (2.0 * dt_fd);
        out[k] = ut - contract(M.at(k), hu.at(k)) - w;
    }
    return out;
}

}  // namespace detail

/// Transformed transport expression on the eta-grid at time t; zero in the continuum exactly when
/// the untransformed expression u_t - div(D grad u) + grad u . q vanishes.
inline ScalarField transformed_transport_expression(const Diffeo& d, const SpaceTimeFn& u, const SpaceTimeFn& v,
                                                    const PhysParams& p, const GridSpec& eta_grid, double t,
                                                    double dt_fd) {
    eta_grid.validate();
    detail::TransportChartData cd;
    cd.jac.resize(eta_grid.size());
    cd.h.resize(eta_grid.size());
    for (int j = 0; j < eta_grid.ny; ++j)
        for (int i = 0; i < eta_grid.nx; ++i) {
            const Vec2 eta = eta_grid.node(i, j);
            require_in_chart(d, eta);
            check_jacobian_bounds(d, eta);
            cd.jac[eta_grid.index(i, j)] = d.jac_g(d.f(eta));
            cd.h[eta_grid.index(i, j)] = chart_h(d, eta);
        }
    auto pull = [&](const SpaceTimeFn& fn, double tt) {
        return sample(eta_grid, [&](double a, double b) { const Vec2 x = d.f({a, b}); return fn(x.x1, x.x2, tt); });
    };
    return detail::transport_expression(pull(u, t), pull(u, t - dt_fd), pull(u, t + dt_fd), dt_fd, pull(v, t), p, cd);
}

/// The same expression in the original coordinates on an x-grid (identity chart data).
inline ScalarField untransformed_transport_expression(const SpaceTimeFn& u, const SpaceTimeFn& v,
                                                      const PhysParams& p, const GridSpec& x_grid, double t,
                                                      double dt_fd) {
    x_grid.validate();
    detail::TransportChartData cd;
    cd.jac.assign(x_grid.size(), Mat2::identity());
    cd.h.assign(x_grid.size(), Vec2{});
    auto at = [&](const SpaceTimeFn& fn, double tt) {
        return sample(x_grid, [&](double a, double b) { return fn(a, b, tt); });
    };
    return detail::transport_expression(at(u, t), at(u, t - dt_fd), at(u, t + dt_fd), dt_fd, at(v, t), p, cd);
}

/// Reference value of u_t - div(D grad u) + grad u . q at x, by nested fourth-order differences.
inline double transport_operator_reference(const SpaceTimeFn& u, const SpaceTimeFn& v, const PhysParams& p,
                                           const Vec2& x, double t, double h = 1e-3) {
    auto grad_u = [&](const Vec2& y) { return fd::grad([&](const Vec2& z) { return u(z.x1, z.x2, t); }, y, h); };
    auto qf = [&](const Vec2& y) {
        return rotate(fd::grad([&](const Vec2& z) { return v(z.x1, z.x2, t); }, y, h));
    };
    auto flux = [&](const Vec2& y) { return dispersion_tensor(qf(y), p) * grad_u(y); };
    const double ut = fd::d1([&](const Vec2& s) { return u(x.x1, x.x2, s.x1); }, Vec2{t, 0.0}, 0, h);
    return ut - fd::div(flux, x, h) + dot(grad_u(x), qf(x));
}

/// Transformed expression minus the reference operator at f(eta), over interior eta-nodes.
inline ScalarField transformed_transport_residual(const Diffeo& d, const SpaceTimeFn& u, const SpaceTimeFn& v,
                                                  const PhysParams& p, const GridSpec& eta_grid, double t,
                                                  double dt_fd) {
    ScalarField r = transformed_transport_expression(d, u, v, p, eta_grid, t, dt_fd);
    for (int j = 0; j < eta_grid.ny; ++j)
        for (int i = 0; i < eta_grid.nx; ++i)
            r(i, j) -= transport_operator_reference(u, v, p, d.f(eta_grid.node(i, j)), t);
    return r;
}

enum class Parity { even, odd };

/// Reflect a field on [0, L] x [c, d] (eta1 >= 0) to [-L, L] x [c, d].
inline ScalarField reflect_extend(const ScalarField& f, Parity parity, double trace_tol = 1e-12) {
    const GridSpec& g = f.grid;
    g.validate();
    if (std::abs(g.x1_min) > 1e-14 * std::max(1.0, g.lx)) throw DomainError("reflection needs the seam at eta1 = 0");
    if (parity == Parity::odd)
        for (int j = 0; j < g.ny; ++j)
            if (std::abs(f(0, j)) > trace_tol)
                throw DomainError("odd extension needs a zero trace on eta1 = 0 (|f| = " +
                                  std::to_string(std::abs(f(0, j))) + ")");
    GridSpec e{2 * g.nx - 1, g.ny, 2.0 * g.lx, g.ly, -g.lx, g.x2_min};
    ScalarField out(e);
    const double sgn = parity == Parity::even ? 1.0 : -1.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            out(g.nx - 1 + i, j) = f(i, j);
            if (i > 0) out(g.nx - 1 - i, j) = sgn * f(i, j);
        }
    return out;
}

}  // namespace dispflow
