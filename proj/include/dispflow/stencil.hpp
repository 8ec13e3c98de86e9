#pragma once

// Pointwise difference quotients of callables. The callable may return double, Vec2 or Sym2.

#include "linalg2.hpp"

namespace dispflow::fd {

inline Vec2 shifted(const Vec2& x, int dir, double s) { return dir == 0 ? Vec2{x.x1 + s, x.x2} : Vec2{x.x1, x.x2 + s}; }

/// Fourth-order central first derivative along axis dir.
template <class F>
auto d1(F&& f, const Vec2& x, int dir, double h) {
    return (f(shifted(x, dir, -2.0 * h)) - 8.0 * f(shifted(x, dir, -h)) + 8.0 * f(shifted(x, dir, h)) -
            f(shifted(x, dir, 2.0 * h))) *
           (1.0 / (12.0 * h));
}

/// Fourth-order central second derivative along axis dir.
template <class F>
auto d2(F&& f, const Vec2& x, int dir, double h) {
    return (-1.0 * f(shifted(x, dir, -2.0 * h)) + 16.0 * f(shifted(x, dir, -h)) - 30.0 * f(x) +
            16.0 * f(shifted(x, dir, h)) - f(shifted(x, dir, 2.0 * h))) *
           (1.0 / (12.0 * h * h));
}

/// Fourth-order mixed derivative d^2/dx1dx2 as a composition of first derivatives.
template <class F>
auto d12(F&& f, const Vec2& x, double h) {
    return d1([&](const Vec2& y) { return d1(f, y, 1, h); }, x, 0, h);
}

template <class F>
Vec2 grad(F&& f, const Vec2& x, double h) {
    return {d1(f, x, 0, h), d1(f, x, 1, h)};
}

/// Fourth-order Hessian of a scalar callable.
template <class F>
Sym2 hess(F&& f, const Vec2& x, double h) {
    return {d2(f, x, 0, h), d12(f, x, h), d2(f, x, 1, h)};
}

/// Divergence of a Vec2-valued callable.
template <class F>
double div(F&& f, const Vec2& x, double h) {
    return d1([&](const Vec2& y) { return f(y).x1; }, x, 0, h) + d1([&](const Vec2& y) { return f(y).x2; }, x, 1, h);
}

/// Second-order central difference in a scalar parameter (time).
template <class F>
auto dt_central(F&& f, double t, double dt) {
    return (f(t + dt) - f(t - dt)) * (1.0 / (2.0 * dt));
}

}  // namespace dispflow::fd
