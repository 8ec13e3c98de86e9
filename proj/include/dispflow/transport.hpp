#pragma once

// Vertex-centred finite volumes for u_t - div(D grad u) + div(u q) = 0 with zero boundary flux,
// backward Euler in time, Picard coupling to the stream-function solve.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "config.hpp"
#include "elliptic.hpp"
#include "grid.hpp"
#include "sparse.hpp"

namespace dispflow {

/// Volumetric fluxes through the dual-cell faces.
/// fx[j*(nx-1)+i]: from node (i,j) to (i+1,j); fy[j*nx+i]: from (i,j) to (i,j+1).
struct FaceFlux {
    GridSpec grid;
    std::vector<double> fx;
    std::vector<double> fy;

    explicit FaceFlux(const GridSpec& g)
        : grid(g),
          fx(static_cast<std::size_t>(g.nx - 1) * g.ny, 0.0),
          fy(static_cast<std::size_t>(g.nx) * (g.ny - 1), 0.0) {}
    double& x(int i, int j) { return fx[static_cast<std::size_t>(j) * (grid.nx - 1) + i]; }
    double x(int i, int j) const { return fx[static_cast<std::size_t>(j) * (grid.nx - 1) + i]; }
    double& y(int i, int j) { return fy[static_cast<std::size_t>(j) * grid.nx + i]; }
    double y(int i, int j) const { return fy[static_cast<std::size_t>(j) * grid.nx + i]; }

    /// Net outflow of the dual cell around node (i,j).
    double net_outflow(int i, int j) const {
        double s = 0.0;
        if (i < grid.nx - 1) s += x(i, j);
        if (i > 0) s -= x(i - 1, j);
        if (j < grid.ny - 1) s += y(i, j);
        if (j > 0) s -= y(i, j - 1);
        return s;
    }
};

/// Fluxes from the stream function: each face flux is the difference of v at the face end points,
/// so every dual cell balances exactly when v vanishes on the boundary.
inline FaceFlux face_flux_from_stream(const ScalarField& v) {
    const GridSpec& g = v.grid;
    const int nx = g.nx, ny = g.ny;
    // v at dual-cell corners (cell centres of the primal grid)
    std::vector<double> vc(static_cast<std::size_t>(nx - 1) * (ny - 1));
    auto corner = [&](int i, int j) -> double& { return vc[static_cast<std::size_t>(j) * (nx - 1) + i]; };
    for (int j = 0; j < ny - 1; ++j)
        for (int i = 0; i < nx - 1; ++i) corner(i, j) = 0.25 * (v(i, j) + v(i + 1, j) + v(i, j + 1) + v(i + 1, j + 1));
    FaceFlux f(g);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx - 1; ++i) {
            const double top = j < ny - 1 ? corner(i, j) : 0.5 * (v(i, j) + v(i + 1, j));
            const double bot = j > 0 ? corner(i, j - 1) : 0.5 * (v(i, j) + v(i + 1, j));
            f.x(i, j) = -(top - bot);
        }
    for (int j = 0; j < ny - 1; ++j)
        for (int i = 0; i < nx; ++i) {
            const double right = i < nx - 1 ? corner(i, j) : 0.5 * (v(i, j) + v(i, j + 1));
            const double left = i > 0 ? corner(i - 1, j) : 0.5 * (v(i, j) + v(i, j + 1));
            f.y(i, j) = right - left;
        }
    return f;
}

/// Fluxes from nodal velocities by face averaging (midpoint rule along each face).
/// Boundary faces carry no flux; discrete balance holds only approximately.
inline FaceFlux face_flux_from_velocity(const VectorField& q) {
    const GridSpec& g = q.grid();
    FaceFlux f(g);
    for (int j = 0; j < g.ny; ++j) {
        const double len = (j == 0 || j == g.ny - 1) ? 0.5 * g.hy() : g.hy();
        for (int i = 0; i < g.nx - 1; ++i)
            f.x(i, j) = len * 0.5 * (q.c1(i, j) + q.c1(i + 1, j));
    }
    for (int j = 0; j < g.ny - 1; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double len = (i == 0 || i == g.nx - 1) ? 0.5 * g.hx() : g.hx();
            f.y(i, j) = len * 0.5 * (q.c2(i, j) + q.c2(i, j + 1));
        }
    return f;
}

/// sum over primal cells of the cell Dirichlet energy; equals u^T A u for the diffusion matrix A.
inline double dirichlet_energy(const ScalarField& u, const SymTensorField& d) {
    const GridSpec& g = u.grid;
    require_same_grid(g, d.grid());
    const double hx = g.hx(), hy = g.hy();
    double e = 0.0;
    for (int j = 0; j < g.ny - 1; ++j)
        for (int i = 0; i < g.nx - 1; ++i) {
            const std::size_t k00 = g.index(i, j), k10 = k00 + 1, k01 = k00 + g.nx, k11 = k01 + 1;
            const double d11 = 0.25 * (d.d11[k00] + d.d11[k10] + d.d11[k01] + d.d11[k11]);
            const double d12 = 0.25 * (d.d12[k00] + d.d12[k10] + d.d12[k01] + d.d12[k11]);
            const double d22 = 0.25 * (d.d22[k00] + d.d22[k10] + d.d22[k01] + d.d22[k11]);
            const double kx = d11 * hy / (2.0 * hx), ky = d22 * hx / (2.0 * hy), kc = 0.5 * d12;
            const double a = u[k10] - u[k00], b = u[k11] - u[k01];
            const double c = u[k01] - u[k00], dd = u[k11] - u[k10];
            const double p = u[k00] - u[k11], r = u[k10] - u[k01];
            e += kx * (a * a + b * b) + ky * (c * c + dd * dd) + kc * (p * p - r * r);
        }
    return e;
}

struct ParabolicResult {
    ScalarField u;
    int lin_iterations = 0;
    double linear_residual = 0.0;  // ||b - K u|| / ||b||
    double mass_drift = 0.0;       // |mass(u) - expected| / max(|expected|, tiny)
    double mass_fix = 0.0;         // constant shift applied to restore the discrete balance
    double dissipation = 0.0;      // u^T A u with the diffusion matrix of this step
};

struct ParabolicOptions {
    double lin_tol = 1e-10;
    int lin_max = 2000;
    bool restore_mass = true;
    const ScalarField* initial_guess = nullptr;
    const ScalarField* source = nullptr;  // nodal source term f, lumped with the trapezoid weights
};

/// Assembles and solves (M/dt + A + C) u = M (u_old/dt + f) on the fixed 9-point pattern of a grid.
class TransportOperator {
public:
    explicit TransportOperator(const GridSpec& g) : grid_(g), weights_(trapezoid_weights(g)) {
        g.validate();
        const int n = static_cast<int>(g.size());
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(n) * 9);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
                        t.push_back({static_cast<int>(g.index(i, j)), static_cast<int>(g.index(ii, jj)), 0.0});
                    }
        k_ = CsrMatrix::from_triplets(n, std::move(t));
        slot_.assign(static_cast<std::size_t>(n) * 9, -1);
        for (int r = 0; r < n; ++r)
            for (int p = k_.rowptr[r]; p < k_.rowptr[r + 1]; ++p) {
                const int c = k_.col[p];
                const int di = c % g.nx - r % g.nx, dj = c / g.nx - r / g.nx;
                slot_[static_cast<std::size_t>(r) * 9 + (dj + 1) * 3 + (di + 1)] = p;
            }
    }

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& weights() const { return weights_; }
    const CsrMatrix& matrix() const { return k_; }

    void assemble(const SymTensorField& d, const FaceFlux& flux, double dt) {
        require_same_grid(grid_, d.grid());
        require_same_grid(grid_, flux.grid);
        if (!(dt > 0.0)) throw SolverError("time step must be positive");
        std::fill(k_.val.begin(), k_.val.end(), 0.0);
        const GridSpec& g = grid_;
        for (std::size_t k = 0; k < g.size(); ++k) add(k, k, weights_[k] / dt);
        const double hx = g.hx(), hy = g.hy();
        for (int j = 0; j < g.ny - 1; ++j)
            for (int i = 0; i < g.nx - 1; ++i) {
                const std::size_t k00 = g.index(i, j), k10 = k00 + 1, k01 = k00 + g.nx, k11 = k01 + 1;
                const double d11 = 0.25 * (d.d11[k00] + d.d11[k10] + d.d11[k01] + d.d11[k11]);
                const double d12 = 0.25 * (d.d12[k00] + d.d12[k10] + d.d12[k01] + d.d12[k11]);
                const double d22 = 0.25 * (d.d22[k00] + d.d22[k10] + d.d22[k01] + d.d22[k11]);
                const double kx = d11 * hy / (2.0 * hx), ky = d22 * hx / (2.0 * hy), kc = 0.5 * d12;
                add_pair(k00, k10, kx);
                add_pair(k01, k11, kx);
                add_pair(k00, k01, ky);
                add_pair(k10, k11, ky);
                // kc * ((u00 - u11)^2 - (u10 - u01)^2)
                add_pair(k00, k11, kc);
                add_pair(k10, k01, -kc);
            }
        // upwind advection
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx - 1; ++i) add_upwind(g.index(i, j), g.index(i + 1, j), flux.x(i, j));
        for (int j = 0; j < g.ny - 1; ++j)
            for (int i = 0; i < g.nx; ++i) add_upwind(g.index(i, j), g.index(i, j + 1), flux.y(i, j));
        for (double x : k_.val)
            if (!std::isfinite(x)) throw SolverError("transport operator has non-finite coefficients");
        dt_ = dt;
        pre_ = Ilu0(k_);
    }

    ParabolicResult solve(const ScalarField& u_old, const SymTensorField& d, const ParabolicOptions& opt) const {
        require_same_grid(grid_, u_old.grid);
        const std::size_t n = grid_.size();
        std::vector<double> b(n);
        double expected_mass = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double f = opt.source ? (*opt.source)[k] : 0.0;
            b[k] = weights_[k] * (u_old[k] / dt_ + f);
            expected_mass += weights_[k] * (u_old[k] + dt_ * f);
        }
        std::vector<double> x = opt.initial_guess ? opt.initial_guess->values : u_old.values;
        const KrylovResult kr = bicgstab(k_, pre_, b, x, opt.lin_tol, opt.lin_max);
        if (!kr.converged)
            throw SolverError("transport linear solve did not converge: relative residual " +
                              format_g17(kr.residual / kr.rhs_norm) + " after " + std::to_string(kr.iterations) +
                              " iterations");
        ParabolicResult out;
        out.u = ScalarField(grid_, std::move(x));
        out.lin_iterations = kr.iterations;
        out.linear_residual = kr.rhs_norm > 0.0 ? kr.residual / kr.rhs_norm : 0.0;
        double total_w = 0.0, mass = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            total_w += weights_[k];
            mass += weights_[k] * out.u[k];
        }
        if (opt.restore_mass) {
            // K 1 = M 1 / dt when the flux balances, so a constant shift restores the discrete balance
            out.mass_fix = (expected_mass - mass) / total_w;
            for (double& x : out.u.values) x += out.mass_fix;
            mass = 0.0;
            for (std::size_t k = 0; k < n; ++k) mass += weights_[k] * out.u[k];
        }
        out.mass_drift = std::abs(mass - expected_mass) / std::max(std::abs(expected_mass), 1e-300);
        if (!out.u.all_finite()) throw SolverError("transport step produced non-finite values");
        out.dissipation = dirichlet_energy(out.u, d);
        return out;
    }

private:
    void add(std::size_t r, std::size_t c, double v) {
        const int di = static_cast<int>(c % grid_.nx) - static_cast<int>(r % grid_.nx);
        const int dj = static_cast<int>(c / grid_.nx) - static_cast<int>(r / grid_.nx);
        k_.val[slot_[r * 9 + (dj + 1) * 3 + (di + 1)]] += v;
    }
    // adds kappa * (u_p - u_q)^2 to the energy
    void add_pair(std::size_t p, std::size_t q, double kappa) {
        add(p, p, kappa);
        add(q, q, kappa);
        add(p, q, -kappa);
        add(q, p, -kappa);
    }
    // flux phi > 0 goes from p to q and carries u_p
    void add_upwind(std::size_t p, std::size_t q, double phi) {
        if (phi > 0.0) {
            add(p, p, phi);
            add(q, p, -phi);
        } else if (phi < 0.0) {
            add(p, q, phi);
            add(q, q, -phi);
        }
    }

    GridSpec grid_;
    std::vector<double> weights_;
    CsrMatrix k_;
    std::vector<int> slot_;
    Ilu0 pre_;
    double dt_ = 0.0;
};

/// One backward-Euler step with given tensor and face fluxes.
inline ParabolicResult parabolic_step(const ScalarField& u_old, const SymTensorField& d, const FaceFlux& flux,
                                      double dt, const ParabolicOptions& opt = {}) {
    TransportOperator op(u_old.grid);
    op.assemble(d, flux, dt);
    return op.solve(u_old, d, opt);
}

/// Convenience overload taking nodal velocities; see face_flux_from_velocity.
inline ParabolicResult parabolic_step(const ScalarField& u_old, const SymTensorField& d, const VectorField& q,
                                      double dt, const ParabolicOptions& opt = {}) {
    return parabolic_step(u_old, d, face_flux_from_velocity(q), dt, opt);
}

struct SimState {
    ScalarField u, v;
    VectorField q, q_eps;
    SymTensorField D_eps;
    double t = 0.0;
    int step = 0;
};

struct StepReport {
    int picard_iterations = 0;
    double picard_gap = 0.0;
    double linear_residual = 0.0;
    double mass_drift = 0.0;
    double mass_fix = 0.0;
    double dissipation = 0.0;  // u^T A u of the accepted solve
    std::vector<double> gap_history;
};

/// Optional manufactured sources: u_t - div(D grad u) + div(u q) = fu, Laplacian v = u_x1 + fv.
struct Forcing {
    std::function<double(double, double, double)> fu;
    std::function<double(double, double, double)> fv;
};

/// Reusable solver objects for one grid.
class CoupledSolver {
public:
    explicit CoupledSolver(const RunConfig& cfg, const Forcing* forcing = nullptr)
        : cfg_(cfg), poisson_(cfg.grid), op_(cfg.grid), forcing_(forcing) {
        cfg.validate();
    }

    const RunConfig& config() const { return cfg_; }

    /// Elliptic solve and coefficients for a given u at time t.
    SimState make_state(const ScalarField& u, double t, int step, const ScalarField* v_guess = nullptr) const {
        SimState s;
        s.u = u;
        s.v = solve_stream(u, t, v_guess);
        fill_coefficients(s);
        s.t = t;
        s.step = step;
        return s;
    }

    std::pair<SimState, StepReport> step(const SimState& st, double dt) {
        const double t_new = st.t + dt;
        StepReport rep;
        ScalarField u_k = st.u;
        ScalarField v_k = st.v;
        std::optional<ScalarField> src;
        if (forcing_ && forcing_->fu) {
            const auto& fu = forcing_->fu;
            src = sample(cfg_.grid, [&](double x, double y) { return fu(x, y, t_new); });
        }
        ParabolicOptions opt;
        opt.lin_tol = cfg_.lin_tol;
        opt.lin_max = cfg_.lin_max;
        opt.source = src ? &*src : nullptr;
        bool converged = false;
        ParabolicResult last;
        for (int it = 1; it <= cfg_.picard_max; ++it) {
            v_k = solve_stream(u_k, t_new, &v_k);
            const VectorField q = stream_velocity(v_k);
            const SymTensorField d = assemble_D_eps(mollify(q, cfg_.reg.moll_radius), cfg_.phys, cfg_.reg);
            op_.assemble(d, face_flux_from_stream(v_k), dt);
            opt.initial_guess = &u_k;
            last = op_.solve(st.u, d, opt);
            const double gap = max_abs_diff(last.u, u_k);
            rep.gap_history.push_back(gap);
            u_k = std::move(last.u);
            rep.picard_iterations = it;
            rep.picard_gap = gap;
            if (gap <= cfg_.picard_tol) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw SolverError("Picard iteration did not converge in " + std::to_string(cfg_.picard_max) +
                              " iterations at t = " + format_g17(t_new) + " (gap " + format_g17(rep.picard_gap) +
                              ")");
        rep.linear_residual = last.linear_residual;
        rep.mass_drift = last.mass_drift;
        rep.mass_fix = last.mass_fix;
        rep.dissipation = last.dissipation;
        SimState out = make_state(u_k, t_new, st.step + 1, &v_k);
        return {std::move(out), std::move(rep)};
    }

private:
    ScalarField solve_stream(const ScalarField& u, double t, const ScalarField* guess) const {
        ScalarField rhs = diff_x1(u);
        if (forcing_ && forcing_->fv) {
            const auto& fv = forcing_->fv;
            rhs += sample(cfg_.grid, [&](double x, double y) { return fv(x, y, t); });
        }
        PoissonResult pr = poisson_.solve(rhs, cfg_.lin_tol, cfg_.lin_max, guess);
        if (!pr.report.converged)
            throw SolverError("Poisson solve did not converge: residual " + format_g17(pr.report.residual_norm) +
                              " after " + std::to_string(pr.report.iterations) + " iterations");
        return std::move(pr.v);
    }

    void fill_coefficients(SimState& s) const {
        s.q = stream_velocity(s.v);
        s.q_eps = mollify(s.q, cfg_.reg.moll_radius);
        s.D_eps = assemble_D_eps(s.q_eps, cfg_.phys, cfg_.reg);
    }

    RunConfig cfg_;
    PoissonSolver poisson_;
    TransportOperator op_;
    const Forcing* forcing_;
};

/// Single coupled step with freshly built solver objects.
inline std::pair<SimState, StepReport> picard_coupled_step(const SimState& state, const RunConfig& cfg) {
    CoupledSolver solver(cfg);
    return solver.step(state, cfg.dt);
}

}  // namespace dispflow
