#pragma once

// Uniform rectangular grid, node fields and second-order difference operators.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg2.hpp"

namespace dispflow {

struct GridSpec {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;
    // lower-left corner; nonzero only for chart rectangles and reflected grids
    double x1_min = 0.0;
    double x2_min = 0.0;

    double hx() const { return lx / (nx - 1); }
    double hy() const { return ly / (ny - 1); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    double x1(int i) const { return x1_min + i * hx(); }
    double x2(int j) const { return x2_min + j * hy(); }
    Vec2 node(int i, int j) const { return {x1(i), x2(j)}; }
    bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }

    void validate() const {
        if (nx < 3 || ny < 3)
            throw GridError("grid needs at least 3 nodes per axis (got " + std::to_string(nx) + "x" +
                            std::to_string(ny) + ")");
        if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
            throw GridError("grid side lengths must be positive and finite");
        if (!std::isfinite(x1_min) || !std::isfinite(x2_min)) throw GridError("grid origin must be finite");
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.nx == b.nx && a.ny == b.ny && a.lx == b.lx && a.ly == b.ly && a.x1_min == b.x1_min &&
               a.x2_min == b.x2_min;
    }
};

inline GridSpec unit_grid(int n) { return GridSpec{n, n, 1.0, 1.0, 0.0, 0.0}; }

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw GridError("fields live on different grids");
}

struct ScalarField {
    GridSpec grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    ScalarField(const GridSpec& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw GridError("value count does not match grid");
    }

    double& operator()(int i, int j) { return values[grid.index(i, j)]; }
    double operator()(int i, int j) const { return values[grid.index(i, j)]; }
    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }

    bool all_finite() const {
        for (double x : values)
            if (!std::isfinite(x)) return false;
        return true;
    }
    void require_finite(const char* what = "field") const {
        if (!all_finite()) throw GridError(std::string(what) + " contains non-finite values");
    }

    ScalarField& operator+=(const ScalarField& o) {
        require_same_grid(grid, o.grid);
        for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        require_same_grid(grid, o.grid);
        for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
        return *this;
    }
    ScalarField& operator*=(double s) {
        for (double& x : values) x *= s;
        return *this;
    }
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(double s, ScalarField a) { return a *= s; }

struct VectorField {
    ScalarField c1;
    ScalarField c2;

    VectorField() = default;
    explicit VectorField(const GridSpec& g) : c1(g), c2(g) {}
    VectorField(ScalarField a, ScalarField b) : c1(std::move(a)), c2(std::move(b)) {
        require_same_grid(c1.grid, c2.grid);
    }
    const GridSpec& grid() const { return c1.grid; }
    Vec2 at(std::size_t k) const { return {c1[k], c2[k]}; }
    void set(std::size_t k, const Vec2& v) { c1[k] = v.x1; c2[k] = v.x2; }
    bool all_finite() const { return c1.all_finite() && c2.all_finite(); }
};

struct SymTensorField {
    ScalarField d11;
    ScalarField d12;
    ScalarField d22;

    SymTensorField() = default;
    explicit SymTensorField(const GridSpec& g) : d11(g), d12(g), d22(g) {}
    const GridSpec& grid() const { return d11.grid; }
    Sym2 at(std::size_t k) const { return {d11[k], d12[k], d22[k]}; }
    void set(std::size_t k, const Sym2& s) { d11[k] = s.a11; d12[k] = s.a12; d22[k] = s.a22; }
    bool all_finite() const { return d11.all_finite() && d12.all_finite() && d22.all_finite(); }
};

/// Evaluate fn(x1, x2) at every node.
template <class Fn>
ScalarField sample(const GridSpec& g, Fn&& fn) {
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out(i, j) = fn(g.x1(i), g.x2(j));
    return out;
}

namespace detail {

// d/ds along a line of n samples with stride, spacing h; writes into out with the same stride
inline void diff_line(const double* f, double* out, int n, std::ptrdiff_t stride, double h) {
    const double inv2h = 1.0 / (2.0 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) * inv2h;
    for (int k = 1; k < n - 1; ++k) out[k * stride] = (f[(k + 1) * stride] - f[(k - 1) * stride]) * inv2h;
    const std::ptrdiff_t e = (n - 1) * stride;
    out[e] = (3.0 * f[e] - 4.0 * f[e - stride] + f[e - 2 * stride]) * inv2h;
}

inline void diff2_line(const double* f, double* out, int n, std::ptrdiff_t stride, double h) {
    const double ih2 = 1.0 / (h * h);
    const std::ptrdiff_t e = (n - 1) * stride;
    if (n >= 4) {
        out[0] = (2.0 * f[0] - 5.0 * f[stride] + 4.0 * f[2 * stride] - f[3 * stride]) * ih2;
        out[e] = (2.0 * f[e] - 5.0 * f[e - stride] + 4.0 * f[e - 2 * stride] - f[e - 3 * stride]) * ih2;
    } else {
        // three nodes: the only available second difference
        out[0] = (f[0] - 2.0 * f[stride] + f[2 * stride]) * ih2;
        out[e] = out[0];
    }
    for (int k = 1; k < n - 1; ++k)
        out[k * stride] = (f[(k + 1) * stride] - 2.0 * f[k * stride] + f[(k - 1) * stride]) * ih2;
}

}  // namespace detail

inline ScalarField diff_x1(const ScalarField& f) {
    const GridSpec& g = f.grid;
    g.validate();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        detail::diff_line(&f.values[g.index(0, j)], &out.values[g.index(0, j)], g.nx, 1, g.hx());
    return out;
}

inline ScalarField diff_x2(const ScalarField& f) {
    const GridSpec& g = f.grid;
    g.validate();
    ScalarField out(g);
    for (int i = 0; i < g.nx; ++i)
        detail::diff_line(&f.values[g.index(i, 0)], &out.values[g.index(i, 0)], g.ny, g.nx, g.hy());
    return out;
}

inline VectorField gradient(const ScalarField& f) { return {diff_x1(f), diff_x2(f)}; }

inline SymTensorField hessian(const ScalarField& f) {
    const GridSpec& g = f.grid;
    g.validate();
    SymTensorField out(g);
    for (int j = 0; j < g.ny; ++j)
        detail::diff2_line(&f.values[g.index(0, j)], &out.d11.values[g.index(0, j)], g.nx, 1, g.hx());
    for (int i = 0; i < g.nx; ++i)
        detail::diff2_line(&f.values[g.index(i, 0)], &out.d22.values[g.index(i, 0)], g.ny, g.nx, g.hy());
    out.d12 = diff_x1(diff_x2(f));
    return out;
}

/// Trapezoid weight of node (i, j); the weights sum to lx*ly.
inline double trapezoid_weight(const GridSpec& g, int i, int j) {
    const double wi = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
    const double wj = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    return wi * wj * g.hx() * g.hy();
}

inline std::vector<double> trapezoid_weights(const GridSpec& g) {
    std::vector<double> w(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) w[g.index(i, j)] = trapezoid_weight(g, i, j);
    return w;
}

inline double integrate(const ScalarField& f) {
    const GridSpec& g = f.grid;
    g.validate();
    f.require_finite("integrand");
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        const double wj = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
        double row = 0.5 * (f(0, j) + f(g.nx - 1, j));
        for (int i = 1; i < g.nx - 1; ++i) row += f(i, j);
        sum += wj * row;
    }
    return sum * g.hx() * g.hy();
}

inline double max_value(const ScalarField& f) {
    double m = f.values.at(0);
    for (double x : f.values) m = std::max(m, x);
    return m;
}
inline double min_value(const ScalarField& f) {
    double m = f.values.at(0);
    for (double x : f.values) m = std::min(m, x);
    return m;
}
inline double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.values) m = std::max(m, std::abs(x));
    return m;
}
/// max |f| over nodes at least `margin` nodes away from every side.
inline double max_abs_interior(const ScalarField& f, int margin = 1) {
    const GridSpec& g = f.grid;
    double m = 0.0;
    for (int j = margin; j < g.ny - margin; ++j)
        for (int i = margin; i < g.nx - margin; ++i) m = std::max(m, std::abs(f(i, j)));
    return m;
}
inline double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid);
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace dispflow
