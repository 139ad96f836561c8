#pragma once

#include "core.hpp"
#include "evolve.hpp"
#include "groundstate.hpp"
#include "interpolate.hpp"
#include "tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace igp {

/// Trapped-side formulas require cos(2 gamma t) above this.
inline constexpr double caustic_eps = 1e-6;

struct BlowupFamilyParams {
    /// Scale of the free family.
    double beta = 1.0;
    double theta0 = 0.0;
    /// Collapse time of the trapped solution, 0 < T < pi/(4 gamma).
    double T = 0.0;
    double lambda0 = 1.0;
    /// lambda0 cos(2 gamma T).
    double beta0 = 0.0;

    static BlowupFamilyParams trapped(double lambda0, double theta0, double T, double gamma)
    {
        if (!(gamma > 0.0)) throw ParamError("gamma must satisfy gamma>0");
        if (!(T > 0.0 && T < std::numbers::pi / (4.0 * gamma)))
            throw ParamError("collapse time must satisfy 0<T<pi/(4 gamma)");
        if (!(lambda0 > 0.0)) throw ParamError("lambda0 must be positive");
        BlowupFamilyParams fp;
        fp.beta = lambda0;
        fp.theta0 = theta0;
        fp.T = T;
        fp.lambda0 = lambda0;
        fp.beta0 = lambda0 * std::cos(2.0 * gamma * T);
        return fp;
    }
};

/// Oscillator ground state pi^{-N/2} exp(-gamma r^2 / 2), unnormalized.
inline RadialField phi_gaussian(GridPtr g, const ModelParams& m)
{
    if (!(m.gamma > 0.0)) throw ParamError("gamma must satisfy gamma>0");
    const double c = std::pow(std::numbers::pi, -0.5 * m.dim);
    const double gm = m.gamma;
    return RadialField::sample(std::move(g), [=](double r) { return c * std::exp(-0.5 * gm * r * r); });
}

/// exp(i theta0) exp(i beta^2/t) exp(-i r^2/(4t)) (beta/t)^{N/2} Q(beta r / t).
inline RadialField s_family(const BlowupFamilyParams& fp, double t, const RadialInterpolant& Q, GridPtr g)
{
    if (!(t > 0.0)) throw ParamError("s_family requires t > 0");
    const int N = g->dim();
    const double k = fp.beta / t;
    const double amp = std::pow(k, 0.5 * N);
    const double ph0 = fp.theta0 + fp.beta * fp.beta / t;
    std::vector<cplx> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = g->r(i);
        v[i] = amp * std::polar(1.0, ph0 - r * r / (4.0 * t)) * Q(k * r);
    }
    return RadialField(std::move(g), std::move(v));
}

/**
 * Space-time sampler over stored snapshots: cubic interpolation in r, and
 * cubic Lagrange interpolation in t over the four nearest snapshots when t
 * is not a stored time.
 */
class TrajectorySampler {
public:
    explicit TrajectorySampler(std::vector<Snapshot> snaps)
    {
        std::sort(snaps.begin(), snaps.end(), [](const Snapshot& a, const Snapshot& b) { return a.t < b.t; });
        if (snaps.empty()) throw ParamError("trajectory sampler needs at least one snapshot");
        for (auto& s : snaps) {
            t_.push_back(s.t);
            ip_.emplace_back(std::move(s.u));
        }
    }

    double t_min() const { return t_.front(); }
    double t_max() const { return t_.back(); }

    cplx operator()(double r, double t) const
    {
        const double tol = 1e-12 * std::max(1.0, std::abs(t));
        if (t < t_.front() - tol || t > t_.back() + tol) throw ParamError("sample time outside the stored trajectory");
        const auto it = std::lower_bound(t_.begin(), t_.end(), t - tol);
        const std::size_t j = static_cast<std::size_t>(it - t_.begin());
        if (j < t_.size() && std::abs(t_[j] - t) <= tol) return ip_[j](r);
        if (t_.size() < 4) throw ParamError("time interpolation needs four snapshots");
        std::size_t lo = j >= 2 ? j - 2 : 0;
        lo = std::min(lo, t_.size() - 4);
        cplx out = 0.0;
        for (std::size_t a = lo; a < lo + 4; ++a) {
            double w = 1.0;
            for (std::size_t c = lo; c < lo + 4; ++c)
                if (c != a) w *= (t - t_[c]) / (t_[a] - t_[c]);
            out += w * ip_[a](r);
        }
        return out;
    }

private:
    std::vector<double> t_;
    std::vector<RadialInterpolant> ip_;
};

/// Free solution to trapped solution at time t, sampled on g.
template <class Sampler>
RadialField lens_forward(const Sampler& u, double t, const ModelParams& m, GridPtr g)
{
    const double c = std::cos(2.0 * m.gamma * t);
    if (!(c > caustic_eps)) throw ParamError("lens transform requires cos(2 gamma t) > 0");
    const double tan2 = std::tan(2.0 * m.gamma * t);
    const double s = tan2 / (2.0 * m.gamma);
    const double amp = std::pow(c, -0.5 * g->dim());
    std::vector<cplx> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = g->r(i);
        v[i] = amp * std::polar(1.0, -0.5 * m.gamma * r * r * tan2) * u(r / c, s);
    }
    return RadialField(std::move(g), std::move(v));
}

/**
 * Trapped solution to free solution at free time s:
 * (1+4 gamma^2 s^2)^{-N/4} exp(i gamma^2 s r^2/(1+4 gamma^2 s^2)) u(r/sqrt(1+4 gamma^2 s^2), atan(2 gamma s)/(2 gamma)).
 */
template <class Sampler>
RadialField lens_inverse(const Sampler& u, double s, const ModelParams& m, GridPtr g)
{
    if (!m.critical()) throw ParamError("inverse lens transform applies at the critical power");
    const double g2 = m.gamma * m.gamma;
    const double d = 1.0 + 4.0 * g2 * s * s;
    const double sq = std::sqrt(d);
    const double t = std::atan(2.0 * m.gamma * s) / (2.0 * m.gamma);
    const double amp = std::pow(d, -0.25 * g->dim());
    const double k = g2 * s / d;
    std::vector<cplx> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = g->r(i);
        v[i] = amp * std::polar(1.0, k * r * r) * u(r / sq, t);
    }
    return RadialField(std::move(g), std::move(v));
}

/// Argument of the free family inside the minimal-mass solution.
inline double minimal_mass_inner_time(const BlowupFamilyParams& fp, double t, double gamma)
{
    return std::sin(2.0 * gamma * (fp.T - t)) / (2.0 * gamma * std::cos(2.0 * gamma * fp.T) * std::cos(2.0 * gamma * t));
}

/**
 * Critical-mass solution collapsing at fp.T. Defined wherever the inner time is
 * positive and |cos 2 gamma t| > caustic_eps; the modulus of the cosine makes
 * the expression periodic with period pi/(2 gamma).
 */
inline RadialField minimal_mass_solution(const BlowupFamilyParams& fp, double t, const ModelParams& m, const RadialInterpolant& Q,
                                         GridPtr g)
{
    if (!m.critical()) throw ParamError("minimal-mass solution applies at the critical power");
    const double c = std::cos(2.0 * m.gamma * t);
    if (!(std::abs(c) > caustic_eps)) throw ParamError("time on the caustic cos(2 gamma t) = 0");
    const double s = minimal_mass_inner_time(fp, t, m.gamma);
    if (!(s > 0.0)) throw ParamError("time outside the lifespan of the minimal-mass solution");
    const double tan2 = std::tan(2.0 * m.gamma * t);
    const double amp = std::pow(std::abs(c), -0.5 * g->dim());
    const double k = fp.lambda0 / s;
    const double famp = std::pow(k, 0.5 * g->dim());
    const double ph0 = fp.theta0 + fp.lambda0 * fp.lambda0 / s;
    std::vector<cplx> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = g->r(i);
        const double y = r / c;
        const double phase = -0.5 * m.gamma * r * r * tan2 + ph0 - y * y / (4.0 * s);
        v[i] = amp * famp * std::polar(1.0, phase) * Q(k * std::abs(y));
    }
    return RadialField(std::move(g), std::move(v));
}

/// Initial datum of the minimal-mass solution written through beta0.
inline RadialField minimal_mass_initial(const BlowupFamilyParams& fp, const ModelParams& m, const RadialInterpolant& Q, GridPtr g)
{
    if (!m.critical()) throw ParamError("minimal-mass solution applies at the critical power");
    const double gm = m.gamma;
    const double k = 2.0 * gm * fp.beta0 / std::sin(2.0 * gm * fp.T);
    const double amp = std::pow(k, 0.5 * g->dim());
    const double ph0 = fp.theta0 + 4.0 * gm * fp.beta0 * fp.beta0 / std::sin(4.0 * gm * fp.T);
    const double cot = 1.0 / std::tan(2.0 * gm * fp.T);
    std::vector<cplx> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = g->r(i);
        v[i] = amp * std::polar(1.0, ph0 - 0.5 * gm * r * r * cot) * Q(k * r);
    }
    return RadialField(std::move(g), std::move(v));
}

namespace detail {

/**
 * GP residual of u = pf(r) Q(kappa r) where Qd is Q sampled on nodes of spacing
 * kappa h, rate(r) = d/dt log pf and dlog_kappa = d/dt log kappa. The time
 * derivative is analytic; Q' comes from centred differences of Qd.
 */
template <class Prefactor, class Rate>
RadialField scaled_profile_residual(GridPtr g, const RadialField& Qd, double kappa, double dlog_kappa, Prefactor pf, Rate rate,
                                    const ModelParams& m, bool free_equation)
{
    const double hq = Qd.grid().h();
    if (std::abs(hq - kappa * g->h()) > 1e-9 * hq) throw ParamError("profile grid is not aligned with the scaled nodes");
    const std::size_t n = g->size();
    if (Qd.size() < n + 1) throw ParamError("profile grid too short for the scaled nodes");
    std::vector<cplx> u(n), ut(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = g->r(i);
        const double q = Qd[i].real();
        const double qm = i > 0 ? Qd[i - 1].real() : q;
        const double dq = (Qd[i + 1].real() - qm) / (2.0 * hq);
        const cplx p = pf(r);
        u[i] = p * q;
        ut[i] = p * (rate(r) * q + dlog_kappa * kappa * r * dq);
    }
    const RadialField uf(g, u);
    const std::vector<cplx> lap = neg_laplacian(uf);
    const double g2 = free_equation ? 0.0 : m.gamma * m.gamma;
    std::vector<cplx> R(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = g->r(i);
        const cplx nl = m.coupling * std::pow(r, -m.b) * modulus_power(std::norm(u[i]), m.p - 1.0) * u[i];
        R[i] = cplx(0.0, 1.0) * ut[i] - lap[i] - g2 * r * r * u[i] + nl;
    }
    return RadialField(std::move(g), std::move(R));
}

} // namespace detail

/**
 * Q on the nodes kappa * r_i of g: shot on spacing kappa h up to profile_rmax
 * and continued by zeros, so the closed forms sample it without interpolation.
 */
inline RadialField aligned_profile(const ModelParams& m, double kappa, const RadialGrid& g, double profile_rmax = 30.0)
{
    const double hq = kappa * g.h();
    const GroundStateResult q = shoot_Q(m, make_grid(m.dim, hq, profile_rmax));
    const std::size_t need = g.size() + 2;
    if (q.profile.size() >= need) return q.profile;
    GridPtr big = make_grid(m.dim, hq, static_cast<double>(need) * hq);
    std::vector<cplx> v(q.profile.values());
    v.resize(big->size(), 0.0);
    return RadialField(std::move(big), std::move(v));
}

/// Scale kappa of Q's argument in the minimal-mass solution at time t.
inline double minimal_mass_scale(const BlowupFamilyParams& fp, double t, double gamma)
{
    return fp.lambda0 / (minimal_mass_inner_time(fp, t, gamma) * std::abs(std::cos(2.0 * gamma * t)));
}

/**
 * Discrete GP residual of the minimal-mass solution at time t. Qd must be Q
 * sampled on a grid of spacing minimal_mass_scale * g->h().
 */
inline RadialField minimal_mass_residual(const BlowupFamilyParams& fp, double t, const ModelParams& m, const RadialField& Qd, GridPtr g)
{
    if (!m.critical()) throw ParamError("minimal-mass solution applies at the critical power");
    const double gm = m.gamma;
    const double c = std::cos(2.0 * gm * t), sn = std::sin(2.0 * gm * t);
    if (!(std::abs(c) > caustic_eps)) throw ParamError("time on the caustic cos(2 gamma t) = 0");
    const double s = minimal_mass_inner_time(fp, t, gm);
    if (!(s > 0.0)) throw ParamError("time outside the lifespan of the minimal-mass solution");
    const double tan2 = sn / c;
    const double kappa = fp.lambda0 / (s * std::abs(c));
    const double dlk = 1.0 / (c * c * s) + 2.0 * gm * tan2;
    const double N = g->dim();
    const double amp = std::pow(kappa, 0.5 * N);
    const double ph0 = fp.theta0 + fp.lambda0 * fp.lambda0 / s;
    const double q = 1.0 / (4.0 * s * c * c);
    const double dq = (1.0 + 4.0 * gm * s * c * sn) / (4.0 * s * s * c * c * c * c);
    const double dph0 = fp.lambda0 * fp.lambda0 / (s * s * c * c);
    auto pf = [&](double r) { return amp * std::polar(1.0, ph0 - (0.5 * gm * tan2 + q) * r * r); };
    auto rate = [&](double r) { return cplx(0.5 * N * dlk, dph0 - (gm * gm / (c * c) + dq) * r * r); };
    return detail::scaled_profile_residual(std::move(g), Qd, kappa, dlk, pf, rate, m, false);
}

/**
 * Residual of the free equation for t -> s_family(fp, s0 - t) at t = 0, that
 * is the free family run towards its collapse. Qd must have spacing
 * (fp.beta / s0) * g->h().
 */
inline RadialField s_family_residual(const BlowupFamilyParams& fp, double s0, const ModelParams& m, const RadialField& Qd, GridPtr g)
{
    if (!(s0 > 0.0)) throw ParamError("s_family requires t > 0");
    const double kappa = fp.beta / s0;
    const double dlk = 1.0 / s0;
    const double N = g->dim();
    const double amp = std::pow(kappa, 0.5 * N);
    const double ph0 = fp.theta0 + fp.beta * fp.beta / s0;
    auto pf = [&](double r) { return amp * std::polar(1.0, ph0 - r * r / (4.0 * s0)); };
    auto rate = [&](double r) { return cplx(0.5 * N * dlk, fp.beta * fp.beta / (s0 * s0) - r * r / (4.0 * s0 * s0)); };
    return detail::scaled_profile_residual(std::move(g), Qd, kappa, dlk, pf, rate, m, true);
}

/// Discrete H^{-1} norm squared Re <R, (1 - L_h)^{-1} R>.
inline double dual_norm_sq(const RadialField& R)
{
    const LaplacianStencil st = neg_laplacian_stencil(R.grid());
    std::vector<cplx> lo(st.lower.begin(), st.lower.end()), di(st.diag.size()), up(st.upper.begin(), st.upper.end());
    for (std::size_t i = 0; i < di.size(); ++i) di[i] = 1.0 + st.diag[i];
    const std::vector<cplx> x = solve_tridiagonal<cplx>(lo, di, up, R.values());
    return std::real(inner(R, RadialField(R.grid_ptr(), x)));
}

} // namespace igp
