#pragma once

// Stream-function Poisson problem: 5-point Laplacian, homogeneous Dirichlet values.

#include <cmath>
#include <memory>
#include <vector>

#include "grid.hpp"
#include "sparse.hpp"

namespace dispflow {

struct EllipticSolveReport {
    int iterations = 0;
    double residual_norm = 0.0;  // discrete L2 of (Laplacian v - rhs) over interior nodes
    double rhs_norm = 0.0;       // discrete L2 of rhs over interior nodes
    double tolerance = 0.0;      // relative to rhs_norm
    bool converged = false;
};

struct PoissonResult {
    ScalarField v;
    EllipticSolveReport report;
};

/// Discrete L2 norm sqrt(hx*hy*sum r^2) of (Laplacian_h v - rhs) over interior nodes.
inline double poisson_residual_norm(const ScalarField& v, const ScalarField& rhs) {
    require_same_grid(v.grid, rhs.grid);
    const GridSpec& g = v.grid;
    const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
    double s = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const double lap = (v(i + 1, j) - 2.0 * v(i, j) + v(i - 1, j)) * ihx2 +
                               (v(i, j + 1) - 2.0 * v(i, j) + v(i, j - 1)) * ihy2;
            const double r = lap - rhs(i, j);
            s += r * r;
        }
    return std::sqrt(s * g.hx() * g.hy());
}

inline double interior_l2_norm(const ScalarField& f) {
    const GridSpec& g = f.grid;
    double s = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) s += f(i, j) * f(i, j);
    return std::sqrt(s * g.hx() * g.hy());
}

/// Owns the assembled operator and preconditioner for one grid; reusable across solves.
class PoissonSolver {
public:
    explicit PoissonSolver(const GridSpec& g) : grid_(g) {
        g.validate();
        mx_ = g.nx - 2;
        my_ = g.ny - 2;
        const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(mx_) * my_ * 5);
        for (int j = 0; j < my_; ++j)
            for (int i = 0; i < mx_; ++i) {
                const int r = unknown(i, j);
                t.push_back({r, r, 2.0 * ihx2 + 2.0 * ihy2});
                if (i > 0) t.push_back({r, unknown(i - 1, j), -ihx2});
                if (i < mx_ - 1) t.push_back({r, unknown(i + 1, j), -ihx2});
                if (j > 0) t.push_back({r, unknown(i, j - 1), -ihy2});
                if (j < my_ - 1) t.push_back({r, unknown(i, j + 1), -ihy2});
            }
        a_ = CsrMatrix::from_triplets(mx_ * my_, std::move(t));
        pre_ = Ilu0(a_);
    }

    const GridSpec& grid() const { return grid_; }

    /// Solve Laplacian v = rhs, v = 0 on the boundary. initial: optional warm start.
    PoissonResult solve(const ScalarField& rhs, double tol = 1e-10, int max_iter = 5000,
                        const ScalarField* initial = nullptr) const {
        require_same_grid(rhs.grid, grid_);
        if (!(tol > 0.0)) throw SolverError("Poisson tolerance must be positive");
        rhs.require_finite("Poisson right-hand side");
        const std::size_t n = static_cast<std::size_t>(mx_) * my_;
        std::vector<double> b(n), x(n, 0.0);
        for (int j = 0; j < my_; ++j)
            for (int i = 0; i < mx_; ++i) {
                b[unknown(i, j)] = -rhs(i + 1, j + 1);
                if (initial) x[unknown(i, j)] = (*initial)(i + 1, j + 1);
            }
        const KrylovResult kr = pcg(a_, pre_, b, x, tol, max_iter);
        PoissonResult out{ScalarField(grid_, 0.0), {}};
        for (int j = 0; j < my_; ++j)
            for (int i = 0; i < mx_; ++i) out.v(i + 1, j + 1) = x[unknown(i, j)];
        out.report.iterations = kr.iterations;
        out.report.rhs_norm = interior_l2_norm(rhs);
        out.report.residual_norm = poisson_residual_norm(out.v, rhs);
        out.report.tolerance = tol;
        out.report.converged = kr.converged;
        if (!std::isfinite(out.report.residual_norm)) throw SolverError("Poisson: non-finite residual");
        return out;
    }

private:
    int unknown(int i, int j) const { return j * mx_ + i; }

    GridSpec grid_;
    int mx_ = 0, my_ = 0;
    CsrMatrix a_;
    Ilu0 pre_;
};

inline PoissonResult solve_poisson(const ScalarField& rhs, double tol = 1e-10, int max_iter = 5000) {
    return PoissonSolver(rhs.grid).solve(rhs, tol, max_iter);
}

}  // namespace dispflow
