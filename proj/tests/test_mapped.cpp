#include <gtest/gtest.h>

#include <cmath>

#include "dispflow/mapped.hpp"

using namespace dispflow;

namespace {

// Laplacian of vp equals d/dx1 of up
double vp(double a, double b) { return std::sin(a) * std::cos(b) + a * a * b; }
double up(double a, double b) { return 2.0 * std::cos(a) * std::cos(b) + 2.0 * a * b; }

double poisson_err(const Diffeo& d, int n) {
    return max_abs_interior(transformed_poisson_residual(d, vp, up, d.chart_grid(n)), 2);
}

const PhysParams kPhys{1.0, 2.0, 0.5};
const SpaceTimeFn kU = [](double x, double y, double t) { return std::sin(x + 0.5 * y) * std::exp(-t) + x * y; };
const SpaceTimeFn kV = [](double x, double y, double t) { return (x + y + 0.3 * x * y) * (1.0 + 0.5 * t); };

double transport_err(const Diffeo& d, const SpaceTimeFn& u, const SpaceTimeFn& v, int n) {
    const GridSpec g = d.chart_grid(n);
    return max_abs_interior(transformed_transport_residual(d, u, v, kPhys, g, 0.3, g.hx()), 2);
}

}  // namespace

TEST(Jacobian, IdentityAndShearExact) {
    for (const Diffeo& d : {identity_diffeo(), shear_diffeo()}) {
        const auto pts = chart_samples(d, 1000, 1);
        EXPECT_EQ(jacobian_identity_check(d, pts), 0.0) << d.name;
        EXPECT_EQ(jacobian_det_check(d, pts), 0.0) << d.name;
    }
}

TEST(Jacobian, Exponential) {
    const Diffeo d = exponential_diffeo();
    const auto pts = chart_samples(d, 1000, 2);
    EXPECT_LE(jacobian_identity_check(d, pts), 1e-12);
    EXPECT_LE(jacobian_det_check(d, pts), 1e-12);
    for (const Vec2& e : pts) {
        const Vec2 back = d.g(d.f(e));
        EXPECT_NEAR(back.x1, e.x1, 1e-10);
        EXPECT_NEAR(back.x2, e.x2, 1e-10);
        EXPECT_NO_THROW(check_jacobian_bounds(d, e));
    }
}

TEST(Jacobian, AnalyticDerivativesMatchDifferences) {
    const Diffeo d = exponential_diffeo();
    const double h = 1e-5;
    for (const Vec2& e : chart_samples(d, 20, 3)) {
        const Vec2 x = d.f(e);
        const Mat2 j = d.jac_g(x);
        for (int i = 0; i < 2; ++i) {
            const Vec2 dx = i == 0 ? Vec2{h, 0.0} : Vec2{0.0, h};
            const Vec2 dg = (d.g(x + dx) - d.g(x - dx)) / (2.0 * h);
            EXPECT_NEAR(j(i, 0), dg.x1, 1e-8);
            EXPECT_NEAR(j(i, 1), dg.x2, 1e-8);
        }
        // second derivatives of g1
        const Sym2 h1 = d.hess_g(0, x);
        const double g12 = (d.jac_g(x + Vec2{0.0, h})(0, 0) - d.jac_g(x - Vec2{0.0, h})(0, 0)) / (2.0 * h);
        EXPECT_NEAR(h1.a12, g12, 1e-8);
    }
}

TEST(Jacobian, RejectsOutsideChart) {
    const Diffeo d = shear_diffeo();
    EXPECT_THROW(jacobian_identity_check(d, {Vec2{0.9, 0.6}}), DomainError);
    Diffeo bad = exponential_diffeo();
    bad.c0 = 2.0;
    EXPECT_THROW(build_chart_fields(bad, up, vp, kPhys, bad.chart_grid(9)), DomainError);
}

TEST(Pushforward, AffineCasesExact) {
    auto gu = [](const Vec2&) { return Vec2{1.0, 2.0}; };
    // u = x1 + 2 x2: identity keeps the gradient, shear gives u~ = eta1 + 2 (eta2 - 0.2 eta1)
    const Diffeo id = identity_diffeo(), sh = shear_diffeo();
    EXPECT_EQ(pushforward_gradient_check(id, gu, gu, chart_samples(id, 100, 4)), 0.0);
    auto gut = [](const Vec2&) { return Vec2{0.6, 2.0}; };
    EXPECT_LE(pushforward_gradient_check(sh, gu, gut, chart_samples(sh, 100, 5)), 1e-15);
}

TEST(Pushforward, Exponential) {
    const Diffeo d = exponential_diffeo();
    auto grad_u = [](const Vec2& x) { return Vec2{std::cos(x.x1) * x.x2, std::sin(x.x1)}; };
    auto grad_ut = [](const Vec2& e) {
        const double s = e.x1 * std::exp(-e.x2);
        return Vec2{std::cos(s) * std::exp(-e.x2) * e.x2, -std::cos(s) * s * e.x2 + std::sin(s)};
    };
    EXPECT_LE(pushforward_gradient_check(d, grad_u, grad_ut, chart_samples(d, 1000, 6)), 1e-10);
}

TEST(ChartH, VanishForConstantJacobian) {
    for (const Diffeo& d : {identity_diffeo(), shear_diffeo()})
        for (const Vec2& e : chart_samples(d, 50, 7)) {
            const Vec2 h = chart_h(d, e);
            EXPECT_EQ(h.x1, 0.0);
            EXPECT_EQ(h.x2, 0.0);
        }
    const Diffeo ex = exponential_diffeo();
    const Vec2 h = chart_h(ex, {0.3, 0.5});
    EXPECT_TRUE(std::isfinite(h.x1) && std::isfinite(h.x2));
    EXPECT_GT(std::abs(h.x1) + std::abs(h.x2), 0.1);
}

TEST(TransformedPoisson, SecondOrderOnAllFixtures) {
    for (const Diffeo& d : {identity_diffeo(), shear_diffeo(), exponential_diffeo()}) {
        const double e1 = poisson_err(d, 33), e2 = poisson_err(d, 65);
        EXPECT_GE(e1 / e2, 3.0) << d.name;
        EXPECT_LE(e2, 1e-3) << d.name;
    }
}

TEST(TransformedTransport, IdentityChartBitwise) {
    const Diffeo id = identity_diffeo();
    const GridSpec g = id.chart_grid(33);
    const ScalarField a = transformed_transport_expression(id, kU, kV, kPhys, g, 0.3, g.hx());
    const ScalarField b = untransformed_transport_expression(kU, kV, kPhys, g, 0.3, g.hx());
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(TransformedTransport, ShearConverges) {
    const SpaceTimeFn u = [](double x, double, double t) { return x * x * std::exp(-t); };
    const SpaceTimeFn v = [](double x, double y, double) { return x * y; };
    const Diffeo d = shear_diffeo();
    EXPECT_GE(transport_err(d, u, v, 33) / transport_err(d, u, v, 65), 3.0);
}

TEST(TransformedTransport, ExponentialConverges) {
    const Diffeo d = exponential_diffeo();
    const double e1 = transport_err(d, kU, kV, 33), e2 = transport_err(d, kU, kV, 65);
    EXPECT_GE(e1 / e2, 3.0);
    EXPECT_LE(e2, 1e-2);
}

TEST(TransformedTensor, PositiveWithScaledBounds) {
    for (const Diffeo& d : {shear_diffeo(), exponential_diffeo()}) {
        const ChartFields c = build_chart_fields(d, up, vp, kPhys, d.chart_grid(33));
        EXPECT_GE(c.min_eig_ratio, 1.0 - 1e-12) << d.name;
        EXPECT_LE(c.max_eig_ratio, 1.0 + 1e-12) << d.name;
        for (std::size_t k = 0; k < c.grid.size(); ++k) {
            EXPECT_GT(eigenvalues(c.M.at(k)).x1, 0.0);
            EXPECT_TRUE(std::isfinite(c.h1[k]) && std::isfinite(c.h2[k]));
        }
    }
}

TEST(Reflect, EvenQuadraticSmoothAtSeam) {
    const GridSpec g{11, 5, 0.5, 1.0, 0.0, 0.0};
    const ScalarField f = sample(g, [](double a, double) { return a * a; });
    const ScalarField e = reflect_extend(f, Parity::even);
    EXPECT_EQ(e.grid.nx, 21);
    EXPECT_DOUBLE_EQ(e.grid.x1_min, -0.5);
    EXPECT_EQ(max_abs(e), max_abs(f));
    const ScalarField d = diff_x1(e);
    const double h = e.grid.hx();
    for (int j = 0; j < g.ny; ++j) {
        EXPECT_EQ(d(10, j), 0.0);
        // one-sided slopes at the seam are -h and +h
        EXPECT_NEAR((e(11, j) - e(10, j)) / h, h, 1e-14);
        EXPECT_NEAR((e(10, j) - e(9, j)) / h, -h, 1e-14);
    }
}

TEST(Reflect, OddLinearIsGlobal) {
    const GridSpec g{9, 4, 0.5, 1.0, 0.0, 0.0};
    const ScalarField o = reflect_extend(sample(g, [](double a, double) { return a; }), Parity::odd);
    const ScalarField ref = sample(o.grid, [](double a, double) { return a; });
    EXPECT_LE(max_abs_diff(o, ref), 1e-15);
    EXPECT_EQ(max_abs(o), 0.5);
}

TEST(Reflect, OddSeamDerivativeContinuous) {
    const GridSpec g{17, 9, 0.5, 1.0, 0.0, 0.0};
    const ScalarField o = reflect_extend(sample(g, [](double a, double b) { return a * (1.0 + b); }), Parity::odd);
    const ScalarField d = diff_x1(o);
    for (int j = 0; j < g.ny; ++j) {
        const double slope = 1.0 + g.x2(j);
        EXPECT_NEAR(d(16, j), slope, 1e-12);
        EXPECT_NEAR(d(15, j), slope, 1e-12);
        EXPECT_NEAR(d(17, j), slope, 1e-12);
    }
}

TEST(Reflect, Contracts) {
    const GridSpec g{9, 5, 0.5, 1.0, 0.0, 0.0};
    EXPECT_THROW(reflect_extend(sample(g, [](double, double b) { return 1.0 + b; }), Parity::odd), DomainError);
    EXPECT_NO_THROW(reflect_extend(sample(g, [](double, double b) { return 1.0 + b; }), Parity::even));
    EXPECT_THROW(reflect_extend(ScalarField(GridSpec{9, 5, 0.5, 1.0, 0.1, 0.0}, 0.0), Parity::even), DomainError);
    const ScalarField f = sample(g, [](double a, double b) { return std::sin(3 * a) * (b - 0.7); });
    EXPECT_EQ(max_abs(reflect_extend(f, Parity::odd)), max_abs(f));
    EXPECT_EQ(max_abs(reflect_extend(f, Parity::even)), max_abs(f));
}
