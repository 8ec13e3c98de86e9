#pragma once

// Checks of the matrix identities, the Hessian reconstruction, the gradient-power equation,
// vector-calculus product rules, the geometric recursion and the log-kernel quantity.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "coefficients.hpp"
#include "grid.hpp"
#include "stencil.hpp"

namespace dispflow {

/// max |A^2 - tr(A) A + det(A) I|
inline double sym2_decompose_check(const Sym2& a) {
    const Mat2 lhs = a * a;
    const Mat2 rhs = a.trace() * a.full() - a.det() * Mat2::identity();
    return max_abs(lhs - rhs);
}

/// max |S D S - (D:S) S + det(S) det(D) D^{-1}|; D must be nonsingular.
inline double sds_identity_check(const Sym2& d, const Sym2& s) {
    const double dd = d.det();
    if (!(std::abs(dd) > 0.0) || !std::isfinite(dd)) throw DomainError("singular tensor in SDS identity");
    const Mat2 sds = s.full() * d.full() * s.full();
    const Mat2 rhs = contract(d, s) * s.full() - (s.det() * dd) * d.inverse().full();
    return max_abs(sds - rhs);
}

/// Natural scale of the SDS identity terms: |S|^2 |D| + |det S det D D^{-1}|.
inline double sds_scale(const Sym2& d, const Sym2& s) {
    return max_abs(s) * max_abs(s) * max_abs(d) + std::abs(s.det() * d.det()) * max_abs(d.inverse());
}

// ---------------------------------------------------------------- Hessian reconstruction

struct CramerInput {
    Sym2 D;
    Vec2 grad_u;
    Vec2 grad_phi;
    Vec2 G;
    double phi = 0.0;
    double ut_minus_w = 0.0;  // equals D : Hessian(u)
};

struct CramerResult {
    Sym2 hessian;
    double det_E = 0.0;      // determinant of the 3x3 coefficient matrix, expanded directly
    double det_D_phi = 0.0;  // det(D) * phi, the closed form of det_E
};

/// Coefficient matrix E of the 3x3 system in (u11, u12, u22).
inline void cramer_system(const CramerInput& in, double e[3][3], double rhs[3]) {
    const Sym2& d = in.D;
    const double P = d.a11 * in.grad_u.x1 + d.a12 * in.grad_u.x2;
    const double Q = d.a12 * in.grad_u.x1 + d.a22 * in.grad_u.x2;
    const Vec2 r = in.grad_phi - in.phi * in.G;
    e[0][0] = P; e[0][1] = Q; e[0][2] = 0.0;
    e[1][0] = 0.0; e[1][1] = P; e[1][2] = Q;
    e[2][0] = d.a11; e[2][1] = 2.0 * d.a12; e[2][2] = d.a22;
    rhs[0] = 0.5 * r.x1;
    rhs[1] = 0.5 * r.x2;
    rhs[2] = in.ut_minus_w;
}

inline double det3(const double e[3][3]) {
    return e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
           e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
}

inline CramerResult cramer_hessian(const CramerInput& in) {
    const Sym2& d = in.D;
    const double dd = d.det();
    if (!(in.phi > 0.0)) throw DomainError("Hessian reconstruction needs phi > 0");
    if (!(dd > 0.0)) throw DomainError("Hessian reconstruction needs det(D) > 0");
    const double ux = in.grad_u.x1, uy = in.grad_u.x2;
    const double P = d.a11 * ux + d.a12 * uy;
    const double Q = d.a12 * ux + d.a22 * uy;
    const double k = d.a22 * d.a11 - 2.0 * d.a12 * d.a12;
    const Vec2 r = in.grad_phi - in.phi * in.G;
    const double s = in.ut_minus_w;
    const double den = dd * in.phi;
    CramerResult out;
    out.hessian.a11 = ((k * ux - d.a12 * d.a22 * uy) * r.x1 - d.a22 * Q * r.x2) / (2.0 * den) + s * Q * Q / den;
    out.hessian.a12 = (d.a11 * Q * r.x1 + d.a22 * P * r.x2) / (2.0 * den) - s * P * Q / den;
    out.hessian.a22 = -(d.a11 * P * r.x1 + (d.a12 * d.a11 * ux - k * uy) * r.x2) / (2.0 * den) + s * P * P / den;
    double e[3][3], rhs[3];
    cramer_system(in, e, rhs);
    out.det_E = det3(e);
    out.det_D_phi = den;
    return out;
}

// ---------------------------------------------------------------- H, F, h coefficients

/// The gradient-power equation with the coefficient signs as derived (`derived`) or with the
/// third term of H and the first two terms of h negated (`as_printed`).
enum class SignConvention { derived, as_printed };

/// Node values needed for the coefficients.
struct IdentityWorkspace {
    Sym2 D, D_t, D_x1, D_x2;
    Vec2 grad_u;
    double u_t = 0.0;
    double w = 0.0;  // u_t - D : Hessian(u)
};

struct HFh {
    Vec2 H, F;
    double h = 0.0;
    double phi = 0.0;
    double det_D = 0.0;
    Vec2 grad_det_D;
    Vec2 G;
    Mat2 D1, D2;
    Sym2 D3;
};

inline HFh assemble_HFh(const IdentityWorkspace& ws, SignConvention sign = SignConvention::derived) {
    const Sym2& d = ws.D;
    const double ux = ws.grad_u.x1, uy = ws.grad_u.x2;
    HFh o;
    o.phi = d.quad(ws.grad_u);
    o.det_D = d.det();
    if (!(o.phi > 0.0)) throw DomainError("coefficients need phi > 0");
    if (!(o.det_D > 0.0)) throw DomainError("coefficients need det(D) > 0");
    const double P = d.a11 * ux + d.a12 * uy;
    const double Q = d.a12 * ux + d.a22 * uy;
    const double k = d.a22 * d.a11 - 2.0 * d.a12 * d.a12;
    o.D1 = {d.a11 * P, d.a12 * d.a11 * ux - k * uy, d.a11 * Q, d.a22 * P};
    o.D2 = {d.a11 * Q, d.a22 * P, -k * ux + d.a12 * d.a22 * uy, d.a22 * Q};
    const Vec2 dg = d * ws.grad_u;
    o.D3 = {-dg.x1 * dg.x1, -dg.x1 * dg.x2, -dg.x2 * dg.x2};
    o.G = Vec2{ws.D_x1.quad(ws.grad_u), ws.D_x2.quad(ws.grad_u)} / o.phi;
    // product rule for det(D) = d11 d22 - d12^2
    auto ddet = [&](const Sym2& dx) { return dx.a11 * d.a22 + d.a11 * dx.a22 - 2.0 * d.a12 * dx.a12; };
    o.grad_det_D = {ddet(ws.D_x1), ddet(ws.D_x2)};
    // row vector of column divergences of D
    const Vec2 div_d{ws.D_x1.a11 + ws.D_x2.a12, ws.D_x1.a12 + ws.D_x2.a22};
    const double sg = sign == SignConvention::derived ? -1.0 : 1.0;
    const double den = o.det_D * o.phi;
    const Vec2& gd = o.grad_det_D;

    // (D1^T grad det, D2^T grad det) grad u
    const Vec2 m_gu = o.D1.transpose() * gd * ux + o.D2.transpose() * gd * uy;
    o.H = d * o.G + (2.0 / o.phi) * ws.u_t * dg + (sg / den) * m_gu;
    o.F = -(d * o.G) + (2.0 / o.phi) * ws.w * dg;

    // (D1 G, D2 G) grad u
    const Vec2 n_gu = o.D1 * o.G * ux + o.D2 * o.G * uy;
    const double s = ws.u_t - ws.w;
    o.h = sg * (-dot(gd, n_gu) / den + 2.0 * s / (den * o.phi) * dot(gd, o.D3 * ws.grad_u)) -
          (2.0 / o.phi) * ws.u_t * (ws.u_t + dot(div_d, ws.grad_u) - ws.w) + ws.D_t.quad(ws.grad_u) / o.phi -
          (2.0 / o.phi) * s * dot(dg, o.G) - dot(d * o.G, o.G);
    return o;
}

/// Largest relative change of (H, F, h) per unit relative perturbation of the inputs, over `trials`
/// random perturbations of size delta.
inline double hfh_relative_sensitivity(const IdentityWorkspace& ws, double delta, int trials, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pm(-1.0, 1.0);
    const HFh base = assemble_HFh(ws);
    const double scale = std::max({max_abs(base.H), max_abs(base.F), std::abs(base.h)});
    auto jitter = [&](double x) { return x * (1.0 + delta * pm(rng)); };
    auto jitter2 = [&](const Sym2& s) { return Sym2{jitter(s.a11), jitter(s.a12), jitter(s.a22)}; };
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        IdentityWorkspace p = ws;
        p.D = jitter2(ws.D);
        p.D_t = jitter2(ws.D_t);
        p.D_x1 = jitter2(ws.D_x1);
        p.D_x2 = jitter2(ws.D_x2);
        p.grad_u = {jitter(ws.grad_u.x1), jitter(ws.grad_u.x2)};
        p.u_t = jitter(ws.u_t);
        p.w = jitter(ws.w);
        const HFh o = assemble_HFh(p);
        const double change =
            std::max({max_abs(o.H - base.H), max_abs(o.F - base.F), std::abs(o.h - base.h)}) / scale;
        worst = std::max(worst, change / delta);
    }
    return worst;
}

// ---------------------------------------------------------------- gradient-power equation residual

using SpaceTimeFn = std::function<double(double, double, double)>;

struct Box {
    double x1_lo, x1_hi, x2_lo, x2_hi;
    bool contains(double x, double y) const {
        return x >= x1_lo - 1e-12 && x <= x1_hi + 1e-12 && y >= x2_lo - 1e-12 && y <= x2_hi + 1e-12;
    }
};

struct PsiStudy {
    SpaceTimeFn u;
    SpaceTimeFn v;
    PhysParams phys;
    int j = 1;
    GridSpec grid;      // evaluation nodes; the spatial difference step is grid.hx()
    Box region{0.15, 0.4, 0.15, 0.4};
    double t = 0.5;
    double dt_fd = 0.0;  // time difference step; 0 means use grid.hx()
    double grad_threshold = 0.5;
    SignConvention sign = SignConvention::derived;
};

struct PsiResidual {
    ScalarField residual;  // zero outside the evaluation region
    double max_residual = 0.0;
    double max_lhs = 0.0;  // size of the left-hand side, for scale
    int nodes = 0;
};

namespace detail {

// pointwise evaluation of every quantity in the equation, with difference step h in space, k in time
class PsiPointwise {
public:
    PsiPointwise(const PsiStudy& s, double h, double k) : s_(s), h_(h), k_(k) {}

    Vec2 grad_u(const Vec2& x, double t) const {
        return fd::grad([&](const Vec2& y) { return s_.u(y.x1, y.x2, t); }, x, h_);
    }
    Sym2 tensor(const Vec2& x, double t) const {
        const Vec2 gv = fd::grad([&](const Vec2& y) { return s_.v(y.x1, y.x2, t); }, x, h_);
        return dispersion_tensor(Vec2{-gv.x2, gv.x1}, s_.phys);
    }
    double phi(const Vec2& x, double t) const { return tensor(x, t).quad(grad_u(x, t)); }
    double psi(const Vec2& x, double t) const { return std::pow(phi(x, t), s_.j); }

    IdentityWorkspace workspace(const Vec2& x, double t) const {
        IdentityWorkspace ws;
        ws.D = tensor(x, t);
        ws.D_t = fd::dt_central([&](double tt) { return tensor(x, tt); }, t, k_);
        ws.D_x1 = fd::d1([&](const Vec2& y) { return tensor(y, t); }, x, 0, h_);
        ws.D_x2 = fd::d1([&](const Vec2& y) { return tensor(y, t); }, x, 1, h_);
        ws.grad_u = grad_u(x, t);
        ws.u_t = fd::dt_central([&](double tt) { return s_.u(x.x1, x.x2, tt); }, t, k_);
        const Sym2 hu = fd::hess([&](const Vec2& y) { return s_.u(y.x1, y.x2, t); }, x, h_);
        ws.w = ws.u_t - contract(ws.D, hu);
        return ws;
    }

    // returns (lhs, rhs)
    std::pair<double, double> sides(const Vec2& x, double t) const {
        const double ps = psi(x, t);
        const double ps_t = fd::dt_central([&](double tt) { return psi(x, tt); }, t, k_);
        auto grad_psi = [&](const Vec2& y) { return fd::grad([&](const Vec2& z) { return psi(z, t); }, y, h_); };
        auto flux = [&](const Vec2& y) { return tensor(y, t) * grad_psi(y) / psi(y, t); };
        const double lhs = ps_t / ps - fd::div(flux, x, h_);
        const HFh c = assemble_HFh(workspace(x, t), s_.sign);
        auto f_field = [&](const Vec2& y) { return assemble_HFh(workspace(y, t), s_.sign).F; };
        const double rhs = dot(c.H, grad_psi(x)) / ps + s_.j * c.h + s_.j * fd::div(f_field, x, h_);
        return {lhs, rhs};
    }

private:
    const PsiStudy& s_;
    double h_, k_;
};

}  // namespace detail

inline PsiResidual psi_equation_residual(const PsiStudy& s) {
    s.grid.validate();
    s.phys.validate_allow_isotropic();
    if (s.j < 1) throw DomainError("power j must be >= 1");
    const double h = s.grid.hx();
    const double k = s.dt_fd > 0.0 ? s.dt_fd : h;
    detail::PsiPointwise pw(s, h, k);
    PsiResidual out;
    out.residual = ScalarField(s.grid, 0.0);
    for (int jj = 0; jj < s.grid.ny; ++jj)
        for (int ii = 0; ii < s.grid.nx; ++ii) {
            const Vec2 x = s.grid.node(ii, jj);
            if (!s.region.contains(x.x1, x.x2)) continue;
            if (norm(pw.grad_u(x, s.t)) < s.grad_threshold)
                throw DomainError("|grad u| below threshold in the evaluation region");
        }
    for (int jj = 0; jj < s.grid.ny; ++jj)
        for (int ii = 0; ii < s.grid.nx; ++ii) {
            const Vec2 x = s.grid.node(ii, jj);
            if (!s.region.contains(x.x1, x.x2)) continue;
            const auto [lhs, rhs] = pw.sides(x, s.t);
            const double r = lhs - rhs;
            out.residual(ii, jj) = r;
            out.max_residual = std::max(out.max_residual, std::abs(r));
            out.max_lhs = std::max(out.max_lhs, std::abs(lhs));
            ++out.nodes;
        }
    if (out.nodes == 0) throw DomainError("evaluation region contains no grid nodes");
    if (!std::isfinite(out.max_residual)) throw DomainError("non-finite residual");
    return out;
}

// ---------------------------------------------------------------- product rules on the grid

struct VectorCalcFields {
    std::function<Vec2(double, double)> F, G;
    std::function<Mat2(double, double)> A;
    std::function<double(double, double)> u;
};

struct VectorCalcReport {
    double grad_dot = 0.0;      // grad(F.G) = gradF G + gradG F
    double div_matvec = 0.0;    // div(A F) = A : gradF + divA F
    double grad_matvec = 0.0;   // grad(A F) = gradF A^T + (A_x1 F, A_x2 F)^T
    double div_scaled = 0.0;    // div(u A) = u divA + grad(u)^T A
    double grad_norm_sq = 0.0;  // grad |grad u|^2 = 2 Hessian(u) grad u
    double max() const { return std::max({grad_dot, div_matvec, grad_matvec, div_scaled, grad_norm_sq}); }
};

inline VectorCalcReport vector_calc_checks(const VectorCalcFields& in, const GridSpec& g, int margin = 2) {
    g.validate();
    auto comp = [&](auto&& fn) { return sample(g, fn); };
    const ScalarField F1 = comp([&](double x, double y) { return in.F(x, y).x1; });
    const ScalarField F2 = comp([&](double x, double y) { return in.F(x, y).x2; });
    const ScalarField G1 = comp([&](double x, double y) { return in.G(x, y).x1; });
    const ScalarField G2 = comp([&](double x, double y) { return in.G(x, y).x2; });
    const ScalarField A11 = comp([&](double x, double y) { return in.A(x, y).a11; });
    const ScalarField A12 = comp([&](double x, double y) { return in.A(x, y).a12; });
    const ScalarField A21 = comp([&](double x, double y) { return in.A(x, y).a21; });
    const ScalarField A22 = comp([&](double x, double y) { return in.A(x, y).a22; });
    const ScalarField U = comp([&](double x, double y) { return in.u(x, y); });

    // gradient matrices: (i, j) entry is d_i of component j
    const ScalarField dF[2][2] = {{diff_x1(F1), diff_x1(F2)}, {diff_x2(F1), diff_x2(F2)}};
    const ScalarField dG[2][2] = {{diff_x1(G1), diff_x1(G2)}, {diff_x2(G1), diff_x2(G2)}};
    const ScalarField* A[2][2] = {{&A11, &A12}, {&A21, &A22}};
    ScalarField dA[2][2][2];  // dA[i][r][c] = d_i A_rc
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            dA[0][r][c] = diff_x1(*A[r][c]);
            dA[1][r][c] = diff_x2(*A[r][c]);
        }

    ScalarField FG(g), AF1(g), AF2(g), UA[2][2] = {ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
    ScalarField gu2(g);
    const ScalarField Ux = diff_x1(U), Uy = diff_x2(U);
    for (std::size_t k = 0; k < g.size(); ++k) {
        FG[k] = F1[k] * G1[k] + F2[k] * G2[k];
        AF1[k] = A11[k] * F1[k] + A12[k] * F2[k];
        AF2[k] = A21[k] * F1[k] + A22[k] * F2[k];
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) UA[r][c][k] = U[k] * (*A[r][c])[k];
        gu2[k] = Ux[k] * Ux[k] + Uy[k] * Uy[k];
    }
    const ScalarField dFG[2] = {diff_x1(FG), diff_x2(FG)};
    const ScalarField dAF[2][2] = {{diff_x1(AF1), diff_x1(AF2)}, {diff_x2(AF1), diff_x2(AF2)}};
    ScalarField dUA[2][2][2];
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            dUA[0][r][c] = diff_x1(UA[r][c]);
            dUA[1][r][c] = diff_x2(UA[r][c]);
        }
    const ScalarField dgu2[2] = {diff_x1(gu2), diff_x2(gu2)};
    const SymTensorField HU = hessian(U);

    VectorCalcReport rep;
    for (int jj = margin; jj < g.ny - margin; ++jj)
        for (int ii = margin; ii < g.nx - margin; ++ii) {
            const std::size_t k = g.index(ii, jj);
            const double Fv[2] = {F1[k], F2[k]}, Gv[2] = {G1[k], G2[k]};
            for (int i = 0; i < 2; ++i) {
                double rhs = 0.0;
                for (int j = 0; j < 2; ++j) rhs += dF[i][j][k] * Gv[j] + dG[i][j][k] * Fv[j];
                rep.grad_dot = std::max(rep.grad_dot, std::abs(dFG[i][k] - rhs));
            }
            {
                const double lhs = dAF[0][0][k] + dAF[1][1][k];
                double rhs = 0.0;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) rhs += (*A[i][j])[k] * dF[i][j][k] + dA[i][i][j][k] * Fv[j];
                rep.div_matvec = std::max(rep.div_matvec, std::abs(lhs - rhs));
            }
            for (int i = 0; i < 2; ++i)
                for (int c = 0; c < 2; ++c) {
                    double rhs = 0.0;
                    for (int j = 0; j < 2; ++j) rhs += dF[i][j][k] * (*A[c][j])[k] + dA[i][c][j][k] * Fv[j];
                    rep.grad_matvec = std::max(rep.grad_matvec, std::abs(dAF[i][c][k] - rhs));
                }
            const double du[2] = {Ux[k], Uy[k]};
            for (int j = 0; j < 2; ++j) {
                const double lhs = dUA[0][0][j][k] + dUA[1][1][j][k];
                const double rhs = U[k] * (dA[0][0][j][k] + dA[1][1][j][k]) + du[0] * A11[k] * (j == 0) +
                                   du[0] * A12[k] * (j == 1) + du[1] * A21[k] * (j == 0) + du[1] * A22[k] * (j == 1);
                rep.div_scaled = std::max(rep.div_scaled, std::abs(lhs - rhs));
            }
            const Sym2 hu = HU.at(k);
            const Vec2 rhs5 = 2.0 * (hu * Vec2{Ux[k], Uy[k]});
            rep.grad_norm_sq = std::max({rep.grad_norm_sq, std::abs(dgu2[0][k] - rhs5.x1), std::abs(dgu2[1][k] - rhs5.x2)});
        }
    return rep;
}

// ---------------------------------------------------------------- geometric recursion

struct RecursionParams {
    double c = 1.0;
    double b = 2.0;
    double alpha = 1.0;
    double y0 = 0.0;

    void validate() const {
        if (!(c > 0.0) || !(alpha > 0.0) || !(b > 1.0) || !(y0 >= 0.0))
            throw DomainError("recursion needs c > 0, alpha > 0, b > 1, y0 >= 0");
    }
    /// c^{-1/alpha} b^{-1/alpha^2}
    double threshold() const { return std::pow(c, -1.0 / alpha) * std::pow(b, -1.0 / (alpha * alpha)); }
};

struct RecursionResult {
    std::vector<double> sequence;  // y_0 ... y_N (N = n_max unless diverged)
    bool converged = false;        // y_{n_max} < 1e-12
    bool diverged = false;         // overflow guard tripped
    int first_below = -1;          // first n with y_n < 1e-12
};

/// Iterates y_{n+1} = c b^n y_n^{1+alpha} with equality. Products are formed directly (exact for
/// dyadic inputs such as c = 1, b = 2, y0 = 1/2); the log form only guards against overflow.
inline RecursionResult degiorgi_limit(const RecursionParams& p, int n_max) {
    p.validate();
    RecursionResult r;
    r.sequence.reserve(static_cast<std::size_t>(n_max) + 1);
    const double lc = std::log(p.c), lb = std::log(p.b);
    constexpr double log_cap = 690.0;  // exp(690) ~ 1e299
    double y = p.y0;
    for (int n = 0;; ++n) {
        r.sequence.push_back(y);
        if (r.first_below < 0 && y < 1e-12) r.first_below = n;
        if (n == n_max) break;
        if (y == 0.0) continue;
        const double ly = lc + n * lb + (1.0 + p.alpha) * std::log(y);
        if (ly > log_cap) {
            r.diverged = true;
            r.sequence.push_back(std::numeric_limits<double>::infinity());
            return r;
        }
        if (ly < -740.0) {
            y = 0.0;  // below the smallest subnormal
            continue;
        }
        const double bn = std::pow(p.b, n);
        y = std::isfinite(bn) ? p.c * bn * std::pow(y, 1.0 + p.alpha) : std::exp(ly);
    }
    r.converged = r.sequence.back() < 1e-12;
    return r;
}

// ---------------------------------------------------------------- log-kernel quantity

/// Integral of ln(x^2 + y^2) over [0,a] x [0,b].
inline double log_r2_rect_integral(double a, double b) {
    return a * b * (std::log(a * a + b * b) - 3.0) + a * a * std::atan(b / a) + b * b * std::atan(a / b);
}

struct KatoResult {
    double eta = 0.0;
    Vec2 argmax;
    int candidates = 0;
};

/// Quadrature of  sup_x  integral over B_r(x0) of |f(y)| |ln|x - y|| dy.
/// Ball nodes carry weight hx*hy; the node coinciding with x uses the exact cell integral of the
/// logarithm. The supremum is taken over a lattice of grid nodes within 2r of x0 (a lower bound).
inline KatoResult kato_eta(const ScalarField& f, double r, const Vec2& x0, int lattice = 11) {
    const GridSpec& g = f.grid;
    g.validate();
    if (!(r > 0.0)) throw DomainError("radius must be positive");
    if (std::abs(g.hx() - g.hy()) > 1e-12 * g.hx()) throw DomainError("log-kernel quadrature needs hx == hy");
    if (x0.x1 - r < g.x1_min || x0.x1 + r > g.x1_min + g.lx || x0.x2 - r < g.x2_min || x0.x2 + r > g.x2_min + g.ly)
        throw DomainError("ball leaves the grid");
    const double h = g.hx();
    const double cell = h * h;
    // the singular cell: -ln|z| over [-h/2, h/2]^2
    const double self = -4.0 * 0.5 * log_r2_rect_integral(0.5 * h, 0.5 * h);

    std::vector<std::size_t> ball;
    std::vector<Vec2> pts;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 y = g.node(i, j);
            if (norm(y - x0) < r) {
                ball.push_back(g.index(i, j));
                pts.push_back(y);
            }
        }
    auto nearest = [&](double x, int n, double lo, double hh) {
        return std::clamp(static_cast<int>(std::lround((x - lo) / hh)), 0, n - 1);
    };
    KatoResult out;
    for (int b = 0; b < lattice; ++b)
        for (int a = 0; a < lattice; ++a) {
            const double sx = lattice > 1 ? -2.0 * r + 4.0 * r * a / (lattice - 1) : 0.0;
            const double sy = lattice > 1 ? -2.0 * r + 4.0 * r * b / (lattice - 1) : 0.0;
            if (sx * sx + sy * sy > 4.0 * r * r + 1e-15) continue;
            const int ci = nearest(x0.x1 + sx, g.nx, g.x1_min, h);
            const int cj = nearest(x0.x2 + sy, g.ny, g.x2_min, h);
            const Vec2 x = g.node(ci, cj);
            double s = 0.0;
            for (std::size_t n = 0; n < ball.size(); ++n) {
                const double fy = std::abs(f[ball[n]]);
                if (fy == 0.0) continue;
                const double d = norm(pts[n] - x);
                s += d == 0.0 ? fy * self : fy * std::abs(std::log(d)) * cell;
            }
            ++out.candidates;
            if (s > out.eta) {
                out.eta = s;
                out.argmax = x;
            }
        }
    return out;
}

/// pi r^2 (ln(1/r) + 1/2): the log-kernel integral of the unit function over B_r about its centre.
inline double kato_eta_unit_exact(double r) { return std::numbers::pi * r * r * (std::log(1.0 / r) + 0.5); }

}  // namespace dispflow
