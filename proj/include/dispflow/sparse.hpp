#pragma once

// Compressed-row matrices, ILU(0) and two Krylov solvers (PCG, BiCGStab).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dispflow {

struct Triplet {
    int row;
    int col;
    double val;
};

struct CsrMatrix {
    int n = 0;
    std::vector<int> rowptr;
    std::vector<int> col;
    std::vector<double> val;

    std::size_t nnz() const { return val.size(); }

    /// Sorts by (row, col) and sums duplicates.
    static CsrMatrix from_triplets(int n, std::vector<Triplet> t) {
        std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        CsrMatrix m;
        m.n = n;
        m.rowptr.assign(static_cast<std::size_t>(n) + 1, 0);
        for (std::size_t k = 0; k < t.size();) {
            const int r = t[k].row, c = t[k].col;
            double s = 0.0;
            while (k < t.size() && t[k].row == r && t[k].col == c) s += t[k++].val;
            m.col.push_back(c);
            m.val.push_back(s);
            ++m.rowptr[static_cast<std::size_t>(r) + 1];
        }
        for (int r = 0; r < n; ++r) m.rowptr[r + 1] += m.rowptr[r];
        return m;
    }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.resize(static_cast<std::size_t>(n));
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) s += val[k] * x[col[k]];
            y[r] = s;
        }
    }
    std::vector<double> operator*(const std::vector<double>& x) const {
        std::vector<double> y;
        multiply(x, y);
        return y;
    }
    double at(int r, int c) const {
        for (int k = rowptr[r]; k < rowptr[r + 1]; ++k)
            if (col[k] == c) return val[k];
        return 0.0;
    }
};

/// Incomplete LU with the sparsity pattern of A; unit lower factor.
class Ilu0 {
public:
    Ilu0() = default;
    explicit Ilu0(const CsrMatrix& a) : lu_(a) {
        const int n = a.n;
        diag_.assign(static_cast<std::size_t>(n), -1);
        for (int r = 0; r < n; ++r)
            for (int k = lu_.rowptr[r]; k < lu_.rowptr[r + 1]; ++k)
                if (lu_.col[k] == r) diag_[r] = k;
        std::vector<int> pos(static_cast<std::size_t>(n), -1);
        for (int r = 0; r < n; ++r) {
            if (diag_[r] < 0) throw SolverError("ILU(0): missing diagonal entry in row " + std::to_string(r));
            for (int k = lu_.rowptr[r]; k < lu_.rowptr[r + 1]; ++k) pos[lu_.col[k]] = k;
            for (int k = lu_.rowptr[r]; k < lu_.rowptr[r + 1] && lu_.col[k] < r; ++k) {
                const int p = lu_.col[k];
                const double piv = lu_.val[diag_[p]];
                lu_.val[k] /= piv;
                const double l = lu_.val[k];
                for (int kk = diag_[p] + 1; kk < lu_.rowptr[p + 1]; ++kk) {
                    const int c = lu_.col[kk];
                    if (pos[c] >= 0) lu_.val[pos[c]] -= l * lu_.val[kk];
                }
            }
            for (int k = lu_.rowptr[r]; k < lu_.rowptr[r + 1]; ++k) pos[lu_.col[k]] = -1;
            if (!(std::abs(lu_.val[diag_[r]]) > 0.0) || !std::isfinite(lu_.val[diag_[r]]))
                throw SolverError("ILU(0): zero or non-finite pivot in row " + std::to_string(r));
        }
    }

    /// z = (LU)^{-1} r
    void apply(const std::vector<double>& r, std::vector<double>& z) const {
        const int n = lu_.n;
        z = r;
        for (int i = 0; i < n; ++i) {
            double s = z[i];
            for (int k = lu_.rowptr[i]; k < diag_[i]; ++k) s -= lu_.val[k] * z[lu_.col[k]];
            z[i] = s;
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = z[i];
            for (int k = diag_[i] + 1; k < lu_.rowptr[i + 1]; ++k) s -= lu_.val[k] * z[lu_.col[k]];
            z[i] = s / lu_.val[diag_[i]];
        }
    }

private:
    CsrMatrix lu_;
    std::vector<int> diag_;
};

struct KrylovResult {
    int iterations = 0;
    double residual = 0.0;  // Euclidean norm of b - A x, recomputed at exit
    double rhs_norm = 0.0;
    bool converged = false;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}
inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double true_residual(const CsrMatrix& a, const std::vector<double>& x, const std::vector<double>& b,
                            std::vector<double>& r) {
    a.multiply(x, r);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = b[k] - r[k];
    return norm2(r);
}

inline void check_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw SolverError(std::string(what) + ": non-finite value during iteration");
}

}  // namespace detail

/// Preconditioned CG for SPD a. Stops when ||b - A x|| <= tol * ||b|| (true residual).
inline KrylovResult pcg(const CsrMatrix& a, const Ilu0& pre, const std::vector<double>& b, std::vector<double>& x,
                        double tol, int max_iter) {
    const std::size_t n = b.size();
    KrylovResult res;
    res.rhs_norm = detail::norm2(b);
    detail::check_finite(res.rhs_norm, "PCG");
    x.resize(n, 0.0);
    if (res.rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    const double target = tol * res.rhs_norm;
    std::vector<double> r(n), z(n), p(n), ap(n);
    double rn = detail::true_residual(a, x, b, r);
    int it = 0;
    while (rn > target && it < max_iter) {
        // (re)start from the true residual
        pre.apply(r, z);
        p = z;
        double rz = detail::dot(r, z);
        while (it < max_iter) {
            a.multiply(p, ap);
            const double pap = detail::dot(p, ap);
            detail::check_finite(pap, "PCG");
            if (pap <= 0.0) throw SolverError("PCG: matrix is not positive definite");
            const double alpha = rz / pap;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            ++it;
            const double rr = detail::norm2(r);
            detail::check_finite(rr, "PCG");
            if (rr <= target) break;
            pre.apply(r, z);
            const double rz_new = detail::dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        }
        rn = detail::true_residual(a, x, b, r);
        detail::check_finite(rn, "PCG");
    }
    res.iterations = it;
    res.residual = rn;
    res.converged = rn <= target;
    return res;
}

/// Right-preconditioned BiCGStab for general a; same stopping rule as pcg.
inline KrylovResult bicgstab(const CsrMatrix& a, const Ilu0& pre, const std::vector<double>& b,
                             std::vector<double>& x, double tol, int max_iter) {
    const std::size_t n = b.size();
    KrylovResult res;
    res.rhs_norm = detail::norm2(b);
    detail::check_finite(res.rhs_norm, "BiCGStab");
    x.resize(n, 0.0);
    if (res.rhs_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    const double target = tol * res.rhs_norm;
    std::vector<double> r(n), r0(n), p(n), v(n), s(n), t(n), ph(n), sh(n);
    double rn = detail::true_residual(a, x, b, r);
    int it = 0;
    int restarts = 0;
    while (rn > target && it < max_iter) {
        r0 = r;
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        bool breakdown = false;
        while (it < max_iter) {
            const double rho_new = detail::dot(r0, r);
            if (rho_new == 0.0 || omega == 0.0) {
                breakdown = true;
                break;
            }
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
            pre.apply(p, ph);
            a.multiply(ph, v);
            const double r0v = detail::dot(r0, v);
            if (r0v == 0.0) {
                breakdown = true;
                break;
            }
            alpha = rho / r0v;
            for (std::size_t k = 0; k < n; ++k) s[k] = r[k] - alpha * v[k];
            ++it;
            if (detail::norm2(s) <= target) {
                for (std::size_t k = 0; k < n; ++k) x[k] += alpha * ph[k];
                break;
            }
            pre.apply(s, sh);
            a.multiply(sh, t);
            const double tt = detail::dot(t, t);
            omega = tt > 0.0 ? detail::dot(t, s) / tt : 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += alpha * ph[k] + omega * sh[k];
                r[k] = s[k] - omega * t[k];
            }
            const double rr = detail::norm2(r);
            detail::check_finite(rr, "BiCGStab");
            if (rr <= target) break;
        }
        rn = detail::true_residual(a, x, b, r);
        detail::check_finite(rn, "BiCGStab");
        if (breakdown && ++restarts > 50) break;
    }
    res.iterations = it;
    res.residual = rn;
    res.converged = rn <= target;
    return res;
}

}  // namespace dispflow
