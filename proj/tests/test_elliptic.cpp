#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dispflow/elliptic.hpp"
#include "dispflow/mms.hpp"

using namespace dispflow;

namespace {
const double pi = std::numbers::pi;

// dense Gaussian elimination, reference for the sparse solvers
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

std::vector<std::vector<double>> to_dense(const CsrMatrix& m) {
    std::vector<std::vector<double>> d(m.n, std::vector<double>(m.n, 0.0));
    for (int r = 0; r < m.n; ++r)
        for (int k = m.rowptr[r]; k < m.rowptr[r + 1]; ++k) d[r][m.col[k]] = m.val[k];
    return d;
}
}  // namespace

TEST(Sparse, TripletsSummedAndSorted) {
    const CsrMatrix m = CsrMatrix::from_triplets(3, {{2, 0, 1.0}, {0, 1, 2.0}, {0, 1, 3.0}, {1, 1, 4.0}});
    EXPECT_EQ(m.nnz(), 3u);
    EXPECT_EQ(m.at(0, 1), 5.0);
    EXPECT_EQ(m.at(1, 1), 4.0);
    EXPECT_EQ(m.at(2, 0), 1.0);
    EXPECT_EQ(m.at(2, 2), 0.0);
    const std::vector<double> y = m * std::vector<double>{1.0, 2.0, 3.0};
    EXPECT_EQ(y[0], 10.0);
    EXPECT_EQ(y[1], 8.0);
    EXPECT_EQ(y[2], 1.0);
}

TEST(Sparse, PcgMatchesDenseSolve) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    const int n = 12;
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 4.0 + u(rng)});
        if (i + 1 < n) {
            const double o = 0.5 * u(rng);
            t.push_back({i, i + 1, o});
            t.push_back({i + 1, i, o});
        }
        if (i + 3 < n) {
            t.push_back({i, i + 3, 0.3});
            t.push_back({i + 3, i, 0.3});
        }
    }
    const CsrMatrix a = CsrMatrix::from_triplets(n, t);
    std::vector<double> b(n);
    for (double& x : b) x = u(rng);
    std::vector<double> x(n, 0.0);
    const KrylovResult r = pcg(a, Ilu0(a), b, x, 1e-14, 100);
    ASSERT_TRUE(r.converged);
    const std::vector<double> ref = dense_solve(to_dense(a), b);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-12);
}

TEST(Sparse, BicgstabNonsymmetric) {
    const int n = 20;
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 3.0});
        if (i > 0) t.push_back({i, i - 1, -1.5});
        if (i + 1 < n) t.push_back({i, i + 1, -0.5});
    }
    const CsrMatrix a = CsrMatrix::from_triplets(n, t);
    std::vector<double> b(n, 1.0), x(n, 0.0);
    const KrylovResult r = bicgstab(a, Ilu0(a), b, x, 1e-13, 200);
    ASSERT_TRUE(r.converged);
    const std::vector<double> ref = dense_solve(to_dense(a), b);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-11);
}

TEST(Sparse, PcgRejectsIndefinite) {
    const CsrMatrix a = CsrMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 1, -1.0}});
    std::vector<double> b{1.0, 1.0}, x(2, 0.0);
    EXPECT_THROW(pcg(a, Ilu0(CsrMatrix::from_triplets(2, {{0, 0, 1.0}, {1, 1, 1.0}})), b, x, 1e-12, 10),
                 SolverError);
}

TEST(Poisson, ZeroRhsGivesZero) {
    const PoissonResult r = solve_poisson(ScalarField(unit_grid(17), 0.0));
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(max_abs(r.v), 0.0);
}

TEST(Poisson, StencilExactForBiquadratic) {
    // the 5-point Laplacian is exact on x(1-x)y(1-y), so the discrete solution is the nodal field
    const GridSpec g{17, 13, 1.0, 1.0, 0.0, 0.0};
    const ScalarField exact = sample(g, [](double x, double y) { return x * (1 - x) * y * (1 - y); });
    const ScalarField rhs = sample(g, [](double x, double y) { return -2.0 * y * (1 - y) - 2.0 * x * (1 - x); });
    const PoissonResult r = solve_poisson(rhs, 1e-13);
    EXPECT_LT(max_abs_diff(r.v, exact), 1e-12);
}

TEST(Poisson, ManufacturedSecondOrder) {
    auto err = [](int n) {
        const GridSpec g = unit_grid(n);
        const ScalarField rhs =
            sample(g, [](double x, double y) { return -2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y); });
        const PoissonResult r = solve_poisson(rhs, 1e-12);
        return max_abs_diff(r.v, sample(g, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }));
    };
    EXPECT_NEAR(err(33) / err(65), 4.0, 0.2);
}

TEST(Poisson, BoundaryExactlyZero) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    ScalarField rhs(unit_grid(21));
    for (double& x : rhs.values) x = u(rng);
    const PoissonResult r = solve_poisson(rhs);
    const GridSpec& g = rhs.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (g.on_boundary(i, j)) { EXPECT_EQ(r.v(i, j), 0.0); }
        }
}

TEST(Poisson, ReflectionSymmetry) {
    const GridSpec g{33, 25, 1.0, 0.8, 0.0, 0.0};
    const ScalarField u = sample(g, [](double x, double) { return std::cos(pi * x); });
    const PoissonResult r = solve_poisson(diff_x1(u), 1e-12);
    double asym = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) asym = std::max(asym, std::abs(r.v(i, j) - r.v(i, g.ny - 1 - j)));
    EXPECT_LT(asym, 1e-10 * max_abs(r.v));
}

TEST(Poisson, DiscreteMaximumPrinciple) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 5; ++t) {
        ScalarField rhs(unit_grid(17));
        for (double& x : rhs.values) x = -u(rng);
        const PoissonResult r = solve_poisson(rhs, 1e-13);
        EXPECT_GE(min_value(r.v), -1e-13);
    }
}

TEST(Poisson, Linearity) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    ScalarField rhs(unit_grid(25));
    for (double& x : rhs.values) x = u(rng);
    const PoissonResult a = solve_poisson(rhs, 1e-13);
    const PoissonResult b = solve_poisson(-3.5 * rhs, 1e-13);
    EXPECT_LT(max_abs_diff(b.v, -3.5 * a.v), 1e-10 * max_abs(b.v));
}

TEST(Poisson, ReportedResidualIsRecomputable) {
    const GridSpec g = unit_grid(33);
    const ScalarField rhs = sample(g, [](double x, double y) { return std::exp(x) * std::cos(3 * y); });
    const PoissonResult r = solve_poisson(rhs, 1e-9);
    // independent evaluation of the 5-point residual
    double s = 0.0;
    const double h2 = g.hx() * g.hx();
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const double lap = (r.v(i + 1, j) + r.v(i - 1, j) + r.v(i, j + 1) + r.v(i, j - 1) - 4 * r.v(i, j)) / h2;
            s += (lap - rhs(i, j)) * (lap - rhs(i, j));
        }
    const double independent = std::sqrt(s * h2);
    EXPECT_NEAR(r.report.residual_norm, independent, 1e-12 * std::max(independent, r.report.rhs_norm));
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.residual_norm, 1e-9 * r.report.rhs_norm * 1.0001);
}

TEST(Poisson, NonConvergenceReported) {
    const GridSpec g = unit_grid(65);
    const ScalarField rhs = sample(g, [](double x, double y) { return std::sin(7 * x) * std::cos(5 * y); });
    const PoissonResult r = solve_poisson(rhs, 1e-14, 2);
    EXPECT_FALSE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 2);
}

TEST(Poisson, RejectsNonFinite) {
    ScalarField rhs(unit_grid(9), 0.0);
    rhs(4, 4) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(solve_poisson(rhs), GridError);
    EXPECT_THROW(solve_poisson(ScalarField(unit_grid(9)), 0.0), SolverError);
}

TEST(Poisson, WarmStartSameAnswer) {
    const GridSpec g = unit_grid(33);
    const ScalarField rhs = sample(g, [](double x, double y) { return x * std::sin(4 * y); });
    const PoissonSolver s(g);
    const PoissonResult cold = s.solve(rhs, 1e-12);
    const PoissonResult warm = s.solve(rhs, 1e-12, 5000, &cold.v);
    EXPECT_LE(warm.report.iterations, 1);
    EXPECT_LT(max_abs_diff(cold.v, warm.v), 1e-10);
}

TEST(PoissonStudy, OrderNearTwo) {
    const MmsResult r = poisson_mms(4);
    ASSERT_EQ(r.levels.size(), 4u);
    EXPECT_EQ(r.levels.front().n, 17);
    EXPECT_EQ(r.levels.back().n, 129);
    EXPECT_GE(r.slope, 1.8);
    EXPECT_LE(r.slope, 2.2);
    for (double o : r.orders) EXPECT_NEAR(o, 2.0, 0.2);
    EXPECT_THROW(poisson_mms(1), ConfigError);
}
