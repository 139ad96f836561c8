#include "igp/evolve.hpp"
#include "igp/exact.hpp"
#include "igp/groundstate.hpp"
#include "igp/interpolate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace igp;

namespace {

constexpr double pi = std::numbers::pi;

ModelParams model(int dim, double p, double gamma = 1.0, double coupling = 1.0)
{
    return validate_params({dim, 0.5, p, gamma, 0.0, coupling});
}

ModelParams critical_model() { return model(3, critical_power(3, 0.5)); }

double max_abs(const RadialField& u)
{
    double s = 0.0;
    for (const auto& z : u.values()) s = std::max(s, std::abs(z));
    return s;
}

/// Q shot once on spacing 1e-3, shared by the closed-form tests.
const GroundStateResult& q_profile()
{
    static const GroundStateResult q = shoot_Q(critical_model(), make_grid(3, 1e-3, 30.0));
    return q;
}

/// Free linear evolution of exp(-r^2/2): (1+2is)^{-N/2} exp(-r^2/(2(1+2is))).
cplx free_gaussian(int dim, double r, double s)
{
    const cplx z(1.0, 2.0 * s);
    return std::pow(z, -0.5 * dim) * std::exp(-r * r / (2.0 * z));
}

} // namespace

TEST(PhiGaussian, MassAndRayleighQuotient)
{
    for (int N : {1, 2, 3}) {
        for (double gm : {0.5, 1.0, 2.0}) {
            const ModelParams m = model(N, 2.0, gm, 0.0);
            const GridPtr g = make_grid(N, 1e-3, 12.0 / std::sqrt(gm));
            const RadialField phi = phi_gaussian(g, m);
            const double expected = std::pow(pi, -N) * std::pow(pi / gm, 0.5 * N);
            EXPECT_NEAR(mass(phi), expected, 1e-6 * expected) << "N = " << N << " gamma = " << gm;
            const double rq = (grad_norm_sq(phi) + gm * gm * variance(phi)) / mass(phi);
            EXPECT_NEAR(rq, gm * N, 1e-4 * gm * N) << "N = " << N << " gamma = " << gm;
        }
    }
}

TEST(SFamily, MassAndGradientGrowth)
{
    const GroundStateResult& q = q_profile();
    const RadialInterpolant Q(q.profile);
    const double gq = grad_norm_sq(q.profile), vq = variance(q.profile);
    BlowupFamilyParams fp;
    fp.beta = 1.0;
    fp.theta0 = 0.4;
    for (double t : {0.1, 0.05, 0.025}) {
        const double kappa = fp.beta / t;
        const GridPtr g = make_grid(3, q.profile.grid().h() / kappa, 29.0 / kappa);
        const RadialField u = s_family(fp, t, Q, g);
        EXPECT_NEAR(mass(u), q.mass, 1e-8 * q.mass) << "t = " << t;
        const double expected = kappa * kappa * gq + vq / (4.0 * fp.beta * fp.beta);
        EXPECT_NEAR(grad_norm_sq(u), expected, 1e-4 * expected) << "t = " << t;
    }
    const GridPtr g = make_grid(3, 1e-2, 4.0);
    EXPECT_THROW(s_family(fp, 0.0, Q, g), ParamError);
    EXPECT_THROW(s_family(fp, -0.1, Q, g), ParamError);
}

TEST(SFamily, ResidualIsSecondOrderInSpace)
{
    const ModelParams m = critical_model();
    BlowupFamilyParams fp;
    fp.beta = 1.0;
    const double s0 = 0.25;
    const double kappa = fp.beta / s0;
    std::vector<double> dn;
    for (double h : {4e-3, 2e-3, 1e-3}) {
        const GridPtr g = make_grid(3, h, 8.0);
        const RadialField Qd = aligned_profile(m, kappa, *g);
        dn.push_back(std::sqrt(dual_norm_sq(s_family_residual(fp, s0, m, Qd, g))));
    }
    for (std::size_t k = 1; k < dn.size(); ++k) {
        EXPECT_GT(dn[k - 1] / dn[k], 3.5) << "level " << k;
        EXPECT_LT(dn[k - 1] / dn[k], 4.5) << "level " << k;
    }
    const GridPtr g = make_grid(3, 2e-3, 8.0);
    EXPECT_THROW(s_family_residual(fp, s0, m, aligned_profile(m, 1.5 * kappa, *g), g), ParamError);
    EXPECT_THROW(s_family_residual(fp, 0.0, m, aligned_profile(m, kappa, *g), g), ParamError);
}

TEST(Lens, IdentityAtTimeZero)
{
    const ModelParams m = critical_model();
    const GridPtr g = make_grid(3, 1e-2, 6.0);
    auto u = [](double r, double t) { return std::polar(std::exp(-r * r), 0.7 * r + t); };
    const RadialField f = lens_forward(u, 0.0, m, g);
    for (std::size_t i = 0; i < g->size(); ++i) ASSERT_NEAR(std::abs(f[i] - u(g->r(i), 0.0)), 0.0, 1e-15) << "node " << i;
}

TEST(Lens, FreeGaussianMapsToRotatingGroundState)
{
    const ModelParams m = model(3, 2.0, 1.0, 0.0);
    const GridPtr g = make_grid(3, 1e-2, 6.0);
    auto u = [](double r, double s) { return free_gaussian(3, r, s); };
    for (double t : {0.1, 0.4, 0.7}) {
        const RadialField f = lens_forward(u, t, m, g);
        const cplx rot = std::polar(1.0, -3.0 * t);
        for (std::size_t i = 0; i < g->size(); ++i) {
            const double r = g->r(i);
            ASSERT_NEAR(std::abs(f[i] - rot * std::exp(-0.5 * r * r)), 0.0, 1e-12) << "t = " << t << " node " << i;
        }
    }
}

TEST(Lens, PreservesMass)
{
    const ModelParams m = critical_model();
    const GridPtr g = make_grid(3, 1e-3, 20.0);
    auto u = [](double r, double s) { return free_gaussian(3, r, s); };
    const double m0 = std::pow(pi, 1.5);
    for (double t : {0.2, 0.5, 0.7}) {
        const RadialField f = lens_forward(u, t, m, g);
        EXPECT_NEAR(mass(f), m0, 1e-6 * m0) << "t = " << t;
    }
}

TEST(Lens, AnalyticRoundTrip)
{
    const ModelParams m = critical_model();
    const GridPtr g = make_grid(3, 1e-2, 6.0);
    auto u = [](double r, double s) { return std::exp(-0.5 * r * r) * std::polar(1.0 + s, 0.3 * r * r - s); };
    auto trapped = [&](double r, double t) {
        const double c = std::cos(2.0 * t), tn = std::tan(2.0 * t);
        return std::pow(c, -1.5) * std::polar(1.0, -0.5 * r * r * tn) * u(r / c, tn / 2.0);
    };
    for (double s : {0.1, 0.5, 2.0}) {
        const RadialField back = lens_inverse(trapped, s, m, g);
        const RadialField ref = RadialField::sample(g, [&](double r) { return u(r, s); });
        EXPECT_LT(max_abs(back - ref) / max_abs(ref), 1e-10) << "s = " << s;
    }
}

TEST(Lens, RejectsCausticAndNonCriticalInverse)
{
    const GridPtr g = make_grid(3, 1e-2, 4.0);
    auto u = [](double r, double) { return cplx(std::exp(-r * r)); };
    EXPECT_THROW(lens_forward(u, pi / 4.0, critical_model(), g), ParamError);
    EXPECT_THROW(lens_forward(u, 1.0, critical_model(), g), ParamError);
    EXPECT_THROW(lens_inverse(u, 0.5, model(3, 2.5), g), ParamError);
}

TEST(MinimalMass, InitialDatumMatchesSolutionAtTimeZero)
{
    const ModelParams m = critical_model();
    const RadialInterpolant Q(q_profile().profile);
    const BlowupFamilyParams fp = BlowupFamilyParams::trapped(3.0, 0.3, 0.5, 1.0);
    const GridPtr g = make_grid(3, 2e-3, 8.0);
    const RadialField a = minimal_mass_solution(fp, 0.0, m, Q, g);
    const RadialField b = minimal_mass_initial(fp, m, Q, g);
    EXPECT_LT(max_abs(a - b) / max_abs(a), 1e-12);
}

TEST(MinimalMass, MassPeriodicityAndPhaseCovariance)
{
    const ModelParams m = critical_model();
    const GroundStateResult& q = q_profile();
    const RadialInterpolant Q(q.profile);
    const BlowupFamilyParams fp = BlowupFamilyParams::trapped(3.0, 0.3, 0.5, 1.0);
    BlowupFamilyParams shifted = fp;
    shifted.theta0 += 1.1;
    for (double t : {0.0, 0.15, 0.3, 0.45}) {
        const double kappa = minimal_mass_scale(fp, t, 1.0);
        const GridPtr g = make_grid(3, q.profile.grid().h() / kappa, 8.0);
        const RadialField u = minimal_mass_solution(fp, t, m, Q, g);
        EXPECT_NEAR(mass(u), q.mass, 1e-8 * q.mass) << "t = " << t;
        const RadialField w = minimal_mass_solution(fp, t + pi / 2.0, m, Q, g);
        EXPECT_LT(max_abs(w - u) / max_abs(u), 1e-8) << "t = " << t;
        const RadialField v = minimal_mass_solution(shifted, t, m, Q, g);
        EXPECT_LT(max_abs(v - u.scaled(std::polar(1.0, 1.1))) / max_abs(u), 1e-12) << "t = " << t;
    }
}

TEST(MinimalMass, GradientGrowsLikeInverseSquareNearCollapse)
{
    const ModelParams m = critical_model();
    const GroundStateResult& q = q_profile();
    const RadialInterpolant Q(q.profile);
    const BlowupFamilyParams fp = BlowupFamilyParams::trapped(1.0, 0.0, 0.5, 1.0);
    std::vector<double> G;
    for (double delta : {0.02, 0.01, 0.005}) {
        const double t = fp.T - delta;
        const double kappa = minimal_mass_scale(fp, t, 1.0);
        const GridPtr g = make_grid(3, q.profile.grid().h() / kappa, 29.0 / kappa);
        G.push_back(grad_norm_sq(minimal_mass_solution(fp, t, m, Q, g)));
    }
    for (std::size_t k = 1; k < G.size(); ++k) {
        EXPECT_GT(G[k] / G[k - 1], 3.8);
        EXPECT_LT(G[k] / G[k - 1], 4.2);
    }
}

TEST(MinimalMass, ResidualIsSecondOrderInSpace)
{
    const ModelParams m = critical_model();
    const BlowupFamilyParams fp = BlowupFamilyParams::trapped(3.0, 0.3, 0.5, 1.0);
    const double t = 0.3;
    const double kappa = minimal_mass_scale(fp, t, 1.0);
    std::vector<double> dn;
    for (double h : {4e-3, 2e-3, 1e-3}) {
        const GridPtr g = make_grid(3, h, 8.0);
        dn.push_back(std::sqrt(dual_norm_sq(minimal_mass_residual(fp, t, m, aligned_profile(m, kappa, *g), g))));
    }
    for (std::size_t k = 1; k < dn.size(); ++k) {
        EXPECT_GT(dn[k - 1] / dn[k], 3.5) << "level " << k;
        EXPECT_LT(dn[k - 1] / dn[k], 4.5) << "level " << k;
    }
}

TEST(MinimalMass, RejectsInvalidInput)
{
    const RadialInterpolant Q(q_profile().profile);
    const GridPtr g = make_grid(3, 1e-2, 4.0);
    const BlowupFamilyParams fp = BlowupFamilyParams::trapped(3.0, 0.3, 0.5, 1.0);
    EXPECT_THROW(minimal_mass_solution(fp, 0.0, model(3, 2.5), Q, g), ParamError);
    EXPECT_THROW(minimal_mass_initial(fp, model(3, 2.5), Q, g), ParamError);
    EXPECT_THROW(minimal_mass_solution(fp, pi / 4.0, critical_model(), Q, g), ParamError);
    EXPECT_THROW(minimal_mass_solution(fp, 0.6, critical_model(), Q, g), ParamError);
    EXPECT_THROW(BlowupFamilyParams::trapped(3.0, 0.0, pi / 4.0, 1.0), ParamError);
    EXPECT_THROW(BlowupFamilyParams::trapped(3.0, 0.0, 0.0, 1.0), ParamError);
    EXPECT_THROW(BlowupFamilyParams::trapped(0.0, 0.0, 0.5, 1.0), ParamError);
    EXPECT_THROW(BlowupFamilyParams::trapped(3.0, 0.0, 0.5, 0.0), ParamError);
}

TEST(TrajectorySampler, InterpolatesCubicTimeDependenceExactly)
{
    const GridPtr g = make_grid(3, 1e-2, 4.0);
    auto field = [&](double t) {
        const double a = 1.0 + t - 2.0 * t * t + 0.5 * t * t * t;
        return RadialField::sample(g, [=](double r) { return a * std::exp(-r * r); });
    };
    std::vector<Snapshot> snaps;
    for (double t : {0.6, 0.0, 0.2, 0.4, 0.8}) snaps.push_back({t, field(t)});
    const TrajectorySampler s(snaps);
    EXPECT_DOUBLE_EQ(s.t_min(), 0.0);
    EXPECT_DOUBLE_EQ(s.t_max(), 0.8);
    for (double t : {0.0, 0.13, 0.4, 0.71, 0.8}) {
        const RadialField ref = field(t);
        for (std::size_t i = 0; i < g->size(); i += 37) ASSERT_NEAR(std::abs(s(g->r(i), t) - ref[i]), 0.0, 1e-12) << "t = " << t;
    }
}

TEST(TrajectorySampler, RejectsMisuse)
{
    const GridPtr g = make_grid(3, 1e-2, 4.0);
    const RadialField u = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
    EXPECT_THROW(TrajectorySampler({}), ParamError);
    const TrajectorySampler two({Snapshot{0.0, u}, Snapshot{1.0, u}});
    EXPECT_NO_THROW(two(0.5, 1.0));
    EXPECT_THROW(two(0.5, 0.5), ParamError);
    EXPECT_THROW(two(0.5, 1.5), ParamError);
    EXPECT_THROW(two(0.5, -0.1), ParamError);
}
