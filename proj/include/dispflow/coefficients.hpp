#pragma once

// Velocity from the stream function, mollification and the dispersion tensors.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace dispflow {

struct PhysParams {
    double a = 1.0;  // transverse dispersivity
    double b = 2.0;  // longitudinal dispersivity
    double m = 0.5;  // molecular diffusivity

    void validate() const {
        if (!(a > 0.0) || !(m > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(m))
            throw ConfigError("a and m must be positive and finite");
        if (!(b > a)) throw ConfigError("dispersion parameters must satisfy b > a");
    }
    /// Same as validate() but admits a == b (isotropic runs used for the maximum principle).
    void validate_allow_isotropic() const {
        if (!(a > 0.0) || !(m > 0.0) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(m))
            throw ConfigError("a and m must be positive and finite");
        if (!(b >= a)) throw ConfigError("dispersion parameters must satisfy b >= a");
    }
};

struct RegParams {
    double eps = 1e-6;
    double moll_radius = 0.0;

    void validate() const {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be positive");
        if (!(moll_radius >= 0.0) || !std::isfinite(moll_radius)) throw ConfigError("moll_radius must be >= 0");
    }
};

/// Pointwise D(q) with D = mI at q = 0.
inline Sym2 dispersion_tensor(const Vec2& q, const PhysParams& p) {
    const double s = norm(q);
    if (s == 0.0) return Sym2::scaled_identity(p.m);
    const double iso = p.a * s + p.m;
    const double c = (p.b - p.a) / s;
    return {iso + c * q.x1 * q.x1, c * q.x1 * q.x2, iso + c * q.x2 * q.x2};
}

/// Pointwise regularized tensor: |q| replaced by sqrt(|q|^2 + eps).
inline Sym2 dispersion_tensor_eps(const Vec2& q, const PhysParams& p, double eps) {
    const double s = std::sqrt(dot(q, q) + eps);
    const double iso = p.a * s + p.m;
    const double c = (p.b - p.a) / s;
    return {iso + c * q.x1 * q.x1, c * q.x1 * q.x2, iso + c * q.x2 * q.x2};
}

/// q = (-dv/dx2, dv/dx1)
inline VectorField stream_velocity(const ScalarField& v) {
    ScalarField q1 = diff_x2(v);
    q1 *= -1.0;
    return {std::move(q1), diff_x1(v)};
}

inline ScalarField divergence(const VectorField& q) {
    ScalarField d = diff_x1(q.c1);
    d += diff_x2(q.c2);
    return d;
}

/// Discrete convolution with the bump exp(-1/(1 - r^2/rho^2)); weights renormalized over in-domain nodes.
inline VectorField mollify(const VectorField& q, double radius) {
    const GridSpec& g = q.grid();
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigError("mollifier radius must be >= 0");
    if (radius == 0.0) return q;
    if (radius > 0.5 * std::min(g.lx, g.ly))
        throw ConfigError("mollifier radius exceeds half the domain size");
    const int rx = static_cast<int>(std::floor(radius / g.hx()));
    const int ry = static_cast<int>(std::floor(radius / g.hy()));
    // kernel offsets and raw weights, computed once
    struct Tap {
        int di, dj;
        double w;
    };
    std::vector<Tap> taps;
    for (int dj = -ry; dj <= ry; ++dj)
        for (int di = -rx; di <= rx; ++di) {
            const double x = di * g.hx(), y = dj * g.hy();
            const double s = (x * x + y * y) / (radius * radius);
            if (s < 1.0) taps.push_back({di, dj, std::exp(-1.0 / (1.0 - s))});
        }
    VectorField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double wsum = 0.0, s1 = 0.0, s2 = 0.0;
            for (const Tap& t : taps) {
                const int ii = i + t.di, jj = j + t.dj;
                if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
                const std::size_t k = g.index(ii, jj);
                wsum += t.w;
                s1 += t.w * q.c1[k];
                s2 += t.w * q.c2[k];
            }
            const std::size_t k = g.index(i, j);
            out.c1[k] = s1 / wsum;
            out.c2[k] = s2 / wsum;
        }
    return out;
}

inline SymTensorField assemble_D(const VectorField& q, const PhysParams& p) {
    SymTensorField d(q.grid());
    for (std::size_t k = 0; k < q.c1.size(); ++k) d.set(k, dispersion_tensor(q.at(k), p));
    return d;
}

inline SymTensorField assemble_D_eps(const VectorField& q_eps, const PhysParams& p, const RegParams& r) {
    if (!(r.eps > 0.0)) throw ConfigError("eps must be positive");
    SymTensorField d(q_eps.grid());
    for (std::size_t k = 0; k < q_eps.c1.size(); ++k) d.set(k, dispersion_tensor_eps(q_eps.at(k), p, r.eps));
    return d;
}

/// Eigenvalues of D(q): a|q|+m across the flow, b|q|+m along it.
inline std::pair<ScalarField, ScalarField> eigen_bounds(const VectorField& q, const PhysParams& p) {
    ScalarField lo(q.grid()), hi(q.grid());
    for (std::size_t k = 0; k < q.c1.size(); ++k) {
        const double s = norm(q.at(k));
        lo[k] = p.a * s + p.m;
        hi[k] = p.b * s + p.m;
    }
    return {std::move(lo), std::move(hi)};
}

}  // namespace dispflow
