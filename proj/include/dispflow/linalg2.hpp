#pragma once

// Fixed-size 2-vectors and 2x2 matrices used for per-node tensor algebra.

#include <algorithm>
#include <cmath>

namespace dispflow {

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x1 : x2; }

    constexpr Vec2& operator+=(const Vec2& o) { x1 += o.x1; x2 += o.x2; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x1 -= o.x1; x2 -= o.x2; return *this; }
    constexpr Vec2& operator*=(double s) { x1 *= s; x2 *= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x1, -a.x2}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x1 / s, a.x2 / s}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double max_abs(const Vec2& a) { return std::max(std::abs(a.x1), std::abs(a.x2)); }

/// General 2x2 matrix, row-major: a[i][j] is row i, column j.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    /// Matrix with the given columns.
    static constexpr Mat2 from_columns(const Vec2& c1, const Vec2& c2) {
        return {c1.x1, c2.x1, c1.x2, c2.x2};
    }

    constexpr double operator()(int i, int j) const {
        return i == 0 ? (j == 0 ? a11 : a12) : (j == 0 ? a21 : a22);
    }
    constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }
    constexpr double trace() const { return a11 + a22; }
    constexpr double det() const { return a11 * a22 - a12 * a21; }

    constexpr Mat2& operator+=(const Mat2& o) {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
        return *this;
    }
    constexpr Mat2& operator-=(const Mat2& o) {
        a11 -= o.a11; a12 -= o.a12; a21 -= o.a21; a22 -= o.a22;
        return *this;
    }
    constexpr Mat2& operator*=(double s) {
        a11 *= s; a12 *= s; a21 *= s; a22 *= s;
        return *this;
    }
};

constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
constexpr Mat2 operator*(double s, Mat2 a) { return a *= s; }
constexpr Mat2 operator*(Mat2 a, double s) { return a *= s; }
constexpr Mat2 operator/(Mat2 a, double s) { return a *= (1.0 / s); }

constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
constexpr Vec2 operator*(const Mat2& a, const Vec2& v) {
    return {a.a11 * v.x1 + a.a12 * v.x2, a.a21 * v.x1 + a.a22 * v.x2};
}
/// Frobenius inner product A:B.
constexpr double contract(const Mat2& a, const Mat2& b) {
    return a.a11 * b.a11 + a.a12 * b.a12 + a.a21 * b.a21 + a.a22 * b.a22;
}
inline double max_abs(const Mat2& a) {
    return std::max({std::abs(a.a11), std::abs(a.a12), std::abs(a.a21), std::abs(a.a22)});
}
/// u v^T
constexpr Mat2 outer(const Vec2& u, const Vec2& v) {
    return {u.x1 * v.x1, u.x1 * v.x2, u.x2 * v.x1, u.x2 * v.x2};
}

/// Symmetric 2x2 matrix stored by its three independent entries.
struct Sym2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    static constexpr Sym2 identity() { return {1.0, 0.0, 1.0}; }
    static constexpr Sym2 scaled_identity(double s) { return {s, 0.0, s}; }

    constexpr double trace() const { return a11 + a22; }
    constexpr double det() const { return a11 * a22 - a12 * a12; }
    constexpr Mat2 full() const { return {a11, a12, a12, a22}; }

    /// Quadratic form x^T A x.
    constexpr double quad(const Vec2& x) const {
        return a11 * x.x1 * x.x1 + 2.0 * a12 * x.x1 * x.x2 + a22 * x.x2 * x.x2;
    }

    /// Inverse; caller guarantees det() != 0.
    constexpr Sym2 inverse() const {
        const double d = det();
        return {a22 / d, -a12 / d, a11 / d};
    }
    /// Adjugate, equal to det(A) A^{-1} whenever A is invertible.
    constexpr Sym2 adjugate() const { return {a22, -a12, a11}; }

    constexpr Sym2& operator+=(const Sym2& o) { a11 += o.a11; a12 += o.a12; a22 += o.a22; return *this; }
    constexpr Sym2& operator-=(const Sym2& o) { a11 -= o.a11; a12 -= o.a12; a22 -= o.a22; return *this; }
    constexpr Sym2& operator*=(double s) { a11 *= s; a12 *= s; a22 *= s; return *this; }
};

constexpr Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
constexpr Sym2 operator-(Sym2 a, const Sym2& b) { return a -= b; }
constexpr Sym2 operator*(double s, Sym2 a) { return a *= s; }
constexpr Sym2 operator*(Sym2 a, double s) { return a *= s; }
constexpr Sym2 operator/(Sym2 a, double s) { return {a.a11 / s, a.a12 / s, a.a22 / s}; }

constexpr Vec2 operator*(const Sym2& a, const Vec2& v) {
    return {a.a11 * v.x1 + a.a12 * v.x2, a.a12 * v.x1 + a.a22 * v.x2};
}
/// Product of two symmetric matrices (generally not symmetric).
constexpr Mat2 operator*(const Sym2& a, const Sym2& b) { return a.full() * b.full(); }

/// A:B for symmetric matrices, i.e. a11 b11 + 2 a12 b12 + a22 b22.
constexpr double contract(const Sym2& a, const Sym2& b) {
    return a.a11 * b.a11 + 2.0 * a.a12 * b.a12 + a.a22 * b.a22;
}
inline double max_abs(const Sym2& a) {
    return std::max({std::abs(a.a11), std::abs(a.a12), std::abs(a.a22)});
}

/// Symmetric part of a general matrix; exact when the input is symmetric.
constexpr Sym2 symmetric_part(const Mat2& m) { return {m.a11, 0.5 * (m.a12 + m.a21), m.a22}; }

/// Congruence J^T A J, symmetric by construction.
constexpr Sym2 congruence(const Mat2& j, const Sym2& a) {
    const Mat2 m = j.transpose() * a.full() * j;
    return {m.a11, m.a12, m.a22};
}

/// Eigenvalues (lo, hi) of a symmetric 2x2 matrix in closed form.
inline Vec2 eigenvalues(const Sym2& a) {
    const double mean = 0.5 * (a.a11 + a.a22);
    const double half_diff = 0.5 * (a.a11 - a.a22);
    const double radius = std::hypot(half_diff, a.a12);
    return {mean - radius, mean + radius};
}

}  // namespace dispflow
