#include "igp/core.hpp"
#include "igp/interpolate.hpp"
#include "igp/tridiagonal.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace igp;

namespace {

constexpr double pi = std::numbers::pi;

RadialField bump(GridPtr g, double a, double c)
{
    return RadialField::sample(g, [=](double r) { return (1.0 + a * r * r) * std::exp(-c * r * r); });
}

RadialField random_field(GridPtr g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0), W(0.3, 2.0);
    const double a = U(rng), b = U(rng), c = W(rng), d = W(rng), th = 3.0 * U(rng);
    const cplx ph = std::polar(1.0, th);
    return RadialField::sample(g, [=](double r) {
        return cplx(a * std::exp(-c * r * r) + b * r * std::exp(-d * r * r)) + ph * 0.2 * std::exp(-r * r);
    });
}

} // namespace

TEST(ValidateParams, CriticalPowerIsDetected)
{
    const ModelParams m = validate_params({3, 0.5, 2.0, 1.0, std::nullopt, 1.0});
    EXPECT_EQ(m.criticality, Criticality::critical);
    EXPECT_DOUBLE_EQ(m.p_crit, 2.0);
    EXPECT_DOUBLE_EQ(m.p_upper, 4.0);
}

TEST(ValidateParams, UpperPowerBoundary)
{
    EXPECT_EQ(validate_params({3, 0.5, 3.9, 1.0, std::nullopt, 1.0}).criticality, Criticality::supercritical);
    EXPECT_EQ(validate_params({3, 0.5, 1.5, 1.0, std::nullopt, 1.0}).criticality, Criticality::subcritical);
    try {
        validate_params({3, 0.5, 4.1, 1.0, std::nullopt, 1.0});
        FAIL() << "p = 4.1 accepted";
    } catch (const ParamError& e) {
        EXPECT_NE(std::string(e.what()).find("p must satisfy"), std::string::npos);
    }
    EXPECT_THROW(validate_params({3, 0.5, 4.0, 1.0, std::nullopt, 1.0}), ParamError);
    EXPECT_THROW(validate_params({3, 0.5, 1.0, 1.0, std::nullopt, 1.0}), ParamError);
}

TEST(ValidateParams, RejectsBOutOfRangeByName)
{
    try {
        validate_params({2, 2.5, 2.0, 1.0, std::nullopt, 1.0});
        FAIL() << "b = 2.5 accepted";
    } catch (const ParamError& e) {
        EXPECT_STREQ(e.what(), "b must satisfy 0<b<min{2,N}");
    }
    EXPECT_THROW(validate_params({1, 1.0, 2.0, 1.0, std::nullopt, 1.0}), ParamError);
    EXPECT_THROW(validate_params({3, 0.0, 2.0, 1.0, std::nullopt, 1.0}), ParamError);
}

TEST(ValidateParams, RejectsGammaAndOmega)
{
    EXPECT_THROW(validate_params({3, 0.5, 2.0, 0.0, std::nullopt, 1.0}), ParamError);
    EXPECT_THROW(validate_params({3, 0.5, 2.0, -1.0, std::nullopt, 1.0}), ParamError);
    EXPECT_THROW(validate_params({3, 0.5, 2.0, 1.0, -3.0, 1.0}), ParamError);
    EXPECT_NO_THROW(validate_params({3, 0.5, 2.0, 1.0, -2.9, 1.0}));
    const ModelParams m = validate_params({3, 0.5, 2.0, 1.0, std::nullopt, 1.0});
    EXPECT_THROW(m.omega_value(), ParamError);
    EXPECT_THROW(m.with_omega(-3.5), ParamError);
}

TEST(Grid, CellCentredNodes)
{
    const RadialGrid g(3, 0.1, 1.0);
    ASSERT_EQ(g.size(), 10u);
    EXPECT_DOUBLE_EQ(g.r(0), 0.05);
    EXPECT_DOUBLE_EQ(g.r(9), 0.95);
    EXPECT_NEAR(g.weight(0), 4.0 * pi * 0.05 * 0.05 * 0.1, 1e-15);
    EXPECT_THROW(RadialGrid(3, 0.0, 1.0), ParamError);
    EXPECT_THROW(RadialGrid(3, 0.5, 1.0), ParamError);
    EXPECT_THROW(RadialGrid(0, 0.1, 1.0), ParamError);
}

TEST(Field, RejectsNonFiniteAndMismatchedLengths)
{
    const GridPtr g = make_grid(3, 0.1, 1.0);
    std::vector<cplx> v(g->size(), 1.0);
    v[3] = cplx(std::nan(""), 0.0);
    EXPECT_THROW(RadialField(g, v), std::invalid_argument);
    EXPECT_THROW(RadialField(g, std::vector<cplx>(5)), std::invalid_argument);
    EXPECT_THROW(integrate_radial(std::vector<double>(3), *g), std::invalid_argument);
}

TEST(IntegrateRadial, ConstantGivesBallVolume)
{
    const double R = 4.0;
    for (double h : {2e-2, 1e-2}) {
        const GridPtr g = make_grid(3, h, R);
        const double v = integrate_radial(std::vector<double>(g->size(), 1.0), *g);
        EXPECT_NEAR(v / (4.0 * pi * R * R * R / 3.0), 1.0, 0.1 * h * h);
    }
}

TEST(IntegrateRadial, GaussianIntegral)
{
    const GridPtr g = make_grid(3, 2e-3, 8.0);
    std::vector<double> f(g->size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g->r(i) * g->r(i));
    EXPECT_NEAR(integrate_radial(f, *g) / std::pow(pi, 1.5), 1.0, 1e-6);
}

TEST(IntegrateRadial, SingularWeightMatchesAdaptiveQuadrature)
{
    const double ref = oracle::radial(3, [](double r) { return std::pow(r, -0.5) * std::exp(-r * r); }, 8.0);
    EXPECT_NEAR(ref, 5.69509472622616, 1e-12);
    const GridPtr g = make_grid(3, 2e-3, 8.0);
    std::vector<double> f(g->size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(g->r(i), -0.5) * std::exp(-g->r(i) * g->r(i));
    EXPECT_NEAR(integrate_radial(f, *g) / ref, 1.0, 1e-8);
}

TEST(IntegrateRadial, Linear)
{
    const GridPtr g = make_grid(2, 0.01, 3.0);
    std::vector<double> a(g->size()), b(g->size()), c(g->size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = std::sin(g->r(i));
        b[i] = std::exp(-g->r(i));
        c[i] = 2.0 * a[i] - 3.0 * b[i];
    }
    EXPECT_NEAR(integrate_radial(c, *g), 2.0 * integrate_radial(a, *g) - 3.0 * integrate_radial(b, *g), 1e-13);
}

TEST(Norms, ZeroField)
{
    const RadialField z(make_grid(3, 0.01, 4.0));
    EXPECT_EQ(mass(z), 0.0);
    EXPECT_EQ(grad_norm_sq(z), 0.0);
    EXPECT_EQ(variance(z), 0.0);
    EXPECT_EQ(sigma_norm_sq(z), 0.0);
}

TEST(Norms, OscillatorGroundStateMoments)
{
    const int N = 3;
    const GridPtr g = make_grid(N, 2e-3, 8.0);
    const RadialField phi = RadialField::sample(g, [](double r) { return std::pow(pi, -1.5) * std::exp(-0.5 * r * r); });
    const double M = mass(phi);
    EXPECT_NEAR(M, std::pow(pi, -1.5), 1e-6);
    EXPECT_NEAR(grad_norm_sq(phi) / (0.5 * N * M), 1.0, 1e-6);
    EXPECT_NEAR(variance(phi) / (0.5 * N * M), 1.0, 1e-6);
    EXPECT_NEAR(M, (2.0 / N) * std::sqrt(grad_norm_sq(phi) * variance(phi)), 1e-6 * M);
    EXPECT_NEAR(sigma_norm_sq(phi), grad_norm_sq(phi) + variance(phi), 1e-15);
}

TEST(Norms, BumpMatchesQuadratureAtSecondOrder)
{
    const double a = 0.3, c = 0.7;
    auto u = [=](double r) { return (1.0 + a * r * r) * std::exp(-c * r * r); };
    auto du = [=](double r) { return (2.0 * a * r - 2.0 * c * r * (1.0 + a * r * r)) * std::exp(-c * r * r); };
    for (int N : {2, 3}) {
        const double M = oracle::radial(N, [&](double r) { return u(r) * u(r); }, 9.0);
        const double G = oracle::radial(N, [&](double r) { return du(r) * du(r); }, 9.0);
        const double V = oracle::radial(N, [&](double r) { return r * r * u(r) * u(r); }, 9.0);
        double prev[3] = {0, 0, 0};
        for (double h : {8e-3, 4e-3, 2e-3}) {
            const RadialField f = bump(make_grid(N, h, 9.0), a, c);
            const double err[3] = {std::abs(mass(f) - M) / M, std::abs(grad_norm_sq(f) - G) / G, std::abs(variance(f) - V) / V};
            for (int k = 0; k < 3; ++k) {
                EXPECT_LT(err[k], 0.1 * h * h) << "N = " << N << " quantity " << k;
                // even integrands are integrated far beyond second order by the midpoint rule
                if (prev[k] > 1e-10) {
                    EXPECT_GT(prev[k] / err[k], 3.8) << "N = " << N << " quantity " << k << " at h = " << h;
                    EXPECT_LT(prev[k] / err[k], 4.2) << "N = " << N << " quantity " << k << " at h = " << h;
                }
                prev[k] = err[k];
            }
        }
    }
}

TEST(Norms, GaugeInvariance)
{
    std::mt19937_64 rng(7);
    const GridPtr g = make_grid(3, 4e-3, 8.0);
    for (int k = 0; k < 20; ++k) {
        const RadialField u = random_field(g, rng);
        const RadialField v = u.scaled(std::polar(1.0, 0.37 * (k + 1)));
        EXPECT_NEAR(mass(v), mass(u), 1e-14 * mass(u));
        EXPECT_NEAR(grad_norm_sq(v), grad_norm_sq(u), 1e-14 * grad_norm_sq(u));
        EXPECT_NEAR(variance(v), variance(u), 1e-14 * variance(u));
        EXPECT_NEAR(sigma_norm_sq(v), sigma_norm_sq(u), 1e-14 * sigma_norm_sq(u));
    }
}

TEST(Norms, HarmonicUncertainty)
{
    std::mt19937_64 rng(11);
    for (int N : {1, 2, 3, 4}) {
        const GridPtr g = make_grid(N, 4e-3, 10.0);
        for (int k = 0; k < 25; ++k) {
            const RadialField u = random_field(g, rng);
            const double M = mass(u);
            EXPECT_LE(M, (2.0 / N) * std::sqrt(grad_norm_sq(u) * variance(u)) + 1e-4 * M) << "N = " << N;
        }
    }
}

TEST(Norms, InnerProductsAreConsistent)
{
    std::mt19937_64 rng(3);
    const GridPtr g = make_grid(3, 4e-3, 8.0);
    const RadialField u = random_field(g, rng);
    const RadialField v = random_field(g, rng);
    EXPECT_NEAR(inner(u, u).real(), mass(u), 1e-13 * mass(u));
    EXPECT_NEAR(grad_inner(u, u).real(), grad_norm_sq(u), 1e-13 * grad_norm_sq(u));
    EXPECT_NEAR(sigma_inner(u, u).real(), sigma_norm_sq(u), 1e-13 * sigma_norm_sq(u));
    EXPECT_NEAR(std::abs(inner(u, v) - std::conj(inner(v, u))), 0.0, 1e-13);
}

TEST(Laplacian, SymmetricInWeightedInnerProduct)
{
    std::mt19937_64 rng(5);
    const GridPtr g = make_grid(3, 4e-3, 8.0);
    const RadialField u = random_field(g, rng), v = random_field(g, rng);
    const RadialField Lu(g, neg_laplacian(u)), Lv(g, neg_laplacian(v));
    EXPECT_NEAR(std::abs(inner(v, Lu) - inner(Lv, u)), 0.0, 1e-9 * std::abs(inner(v, Lu)));
    EXPECT_NEAR(inner(u, Lu).real(), grad_norm_sq(u), 1e-10 * grad_norm_sq(u));
}

TEST(Tridiagonal, SolvesRandomDiagonallyDominantSystem)
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const std::size_t n = 50;
    std::vector<double> lo(n), di(n), up(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = i ? U(rng) : 0.0;
        up[i] = i + 1 < n ? U(rng) : 0.0;
        di[i] = 3.0 + U(rng);
        x[i] = U(rng);
    }
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i)
        rhs[i] = di[i] * x[i] + (i ? lo[i] * x[i - 1] : 0.0) + (i + 1 < n ? up[i] * x[i + 1] : 0.0);
    const std::vector<double> y = solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], x[i], 1e-13);
    const std::vector<double> zero(n, 0.0);
    EXPECT_THROW(solve_tridiagonal(zero, zero, zero, rhs), LinearSolveError);
}

TEST(Interpolant, CubicAccuracyOffGrid)
{
    const GridPtr g = make_grid(3, 1e-2, 6.0);
    const RadialField u = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
    const RadialInterpolant ip(u);
    for (double r : {0.0, 0.013, 0.5, 1.234, 3.3}) EXPECT_NEAR(ip(r).real(), std::exp(-r * r), 1e-7) << "r = " << r;
    EXPECT_EQ(ip(10.0), cplx(0.0));
}
