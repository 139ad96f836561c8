#pragma once

#include "core.hpp"
#include "functionals.hpp"
#include "tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

namespace igp {

struct GroundStateResult {
    RadialField profile;
    double omega = 0.0;
    double residual_sup = 0.0;
    double pohozaev_1 = 0.0;
    double pohozaev_2 = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    int iterations = 0;
    /// Central amplitude found by the shooting bisection (shooting solvers only).
    double shoot_amplitude = 0.0;
    /// Energy after each accepted flow step (gradient flow only).
    std::vector<double> energy_history;
};

/// Residuals of the two Pohozaev identities for the stationary equation with frequency omega.
inline std::pair<double, double> pohozaev_residuals(const RadialField& u, const ModelParams& m)
{
    const double w = m.omega_value();
    const double G = grad_norm_sq(u), M = mass(u), V = variance(u);
    const double P = m.coupling * potential_P(u, m);
    const double g2 = m.gamma * m.gamma;
    const int N = m.dim;
    const double id1 = G + w * M + g2 * V - P;
    const double id2 = 0.5 * (2.0 - N) * G - 0.5 * N * w * M - 0.5 * (N + 2.0) * g2 * V + (N - m.b) / (m.p + 1.0) * P;
    return {id1, id2};
}

namespace detail {

/// -L u + (freq + trap^2 r^2) u - coupling r^{-b} |u|^{p-1} u = 0 with real u.
struct StationaryProblem {
    GridPtr grid;
    double b, p, coupling;
    std::vector<double> pot;
    std::vector<double> rb;
    LaplacianStencil st;

    StationaryProblem(GridPtr g, double freq, double trap, double b_, double p_, double c_)
        : grid(std::move(g)), b(b_), p(p_), coupling(c_), st(neg_laplacian_stencil(*grid))
    {
        const std::size_t n = grid->size();
        pot.resize(n);
        rb.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = grid->r(i);
            pot[i] = freq + trap * trap * r * r;
            rb[i] = coupling * std::pow(r, -b);
        }
    }

    double nonlinear(std::size_t i, double u) const { return rb[i] * std::pow(std::abs(u), p - 1.0) * u; }

    std::vector<double> residual(const std::vector<double>& u) const
    {
        std::vector<double> f = apply_stencil(st, u);
        for (std::size_t i = 0; i < u.size(); ++i) f[i] += pot[i] * u[i] - nonlinear(i, u[i]);
        return f;
    }

    enum class Outcome { crosses, diverges, reached_end };

    /// March the discrete recurrence outward from the central value u0.
    Outcome march(double u0, std::vector<double>& u, std::size_t& stop) const
    {
        const auto& g = *grid;
        const std::size_t n = g.size();
        const double h2 = g.h() * g.h();
        u.assign(n, 0.0);
        u[0] = u0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double left = i > 0 ? g.face_weight(i - 1) * (u[i] - u[i - 1]) : 0.0;
            const double src = h2 * g.weight(i) * (pot[i] * u[i] - nonlinear(i, u[i]));
            const double next = u[i] + (left + src) / g.face_weight(i);
            if (!std::isfinite(next)) {
                stop = i;
                return Outcome::diverges;
            }
            if (next <= 0.0) {
                stop = i + 1;
                return Outcome::crosses;
            }
            if (next > u[i]) {
                stop = i + 1;
                return Outcome::diverges;
            }
            u[i + 1] = next;
        }
        stop = n - 1;
        return Outcome::reached_end;
    }
};

struct ShootOutput {
    std::vector<double> profile;
    double u0 = 0.0;
    int iterations = 0;
};

/// Bisection on the central amplitude followed by Newton polish of the full discrete system.
inline ShootOutput shoot(const StationaryProblem& prob, double tol, int max_newton = 60)
{
    using Outcome = StationaryProblem::Outcome;
    std::vector<double> work;
    std::size_t stop = 0;

    double lo = 0.0, hi = 0.0;
    double trial = 1.0;
    Outcome o = prob.march(trial, work, stop);
    if (o == Outcome::reached_end) {
        lo = hi = trial;
    } else if (o == Outcome::crosses) {
        hi = trial;
        for (int k = 0; k < 400 && lo == 0.0; ++k) {
            trial *= 0.5;
            if (prob.march(trial, work, stop) != Outcome::crosses) lo = trial;
            else hi = trial;
        }
    } else {
        lo = trial;
        for (int k = 0; k < 400 && hi == 0.0; ++k) {
            trial *= 2.0;
            if (prob.march(trial, work, stop) == Outcome::crosses) hi = trial;
            else lo = trial;
        }
    }
    if (lo == 0.0 || hi == 0.0) throw SolverError("no sign change bracket", "shooting could not bracket the central amplitude");

    double width = hi - lo;
    for (int k = 0; k < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (prob.march(mid, work, stop) == Outcome::crosses) hi = mid;
        else lo = mid;
        if (!(hi - lo < width)) throw SolverError("no sign change bracket", "bisection bracket failed to shrink");
        width = hi - lo;
    }

    std::vector<double> guess;
    prob.march(lo, guess, stop);
    if (!(guess[0] > 0.0) || !(guess.size() > 1 && guess[1] > 0.0))
        throw SolverError("singular start failure", "first recurrence step is inconsistent");
    // the marched profile is trusted up to its turning point; continue the tail geometrically
    std::size_t k = 1;
    while (k + 1 < guess.size() && guess[k + 1] > 0.0 && guess[k + 1] < guess[k]) ++k;
    const double ratio = std::min(guess[k] / guess[k - 1], 1.0 - 1e-3);
    for (std::size_t i = k + 1; i < guess.size(); ++i) guess[i] = guess[i - 1] * ratio;

    std::vector<double> u = guess;
    std::vector<double> f = prob.residual(u);
    auto sup = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s = std::max(s, std::abs(x));
        return s;
    };
    double res = sup(f);
    int it = 0;
    double best = res;
    std::vector<double> best_u = u;
    int stall = 0;
    for (; it < max_newton && stall < 3; ++it) {
        const std::size_t n = u.size();
        std::vector<double> lower = prob.st.lower, upper = prob.st.upper, diag(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = prob.st.diag[i] + prob.pot[i] - prob.p * prob.rb[i] * std::pow(std::abs(u[i]), prob.p - 1.0);
            rhs[i] = -f[i];
        }
        const std::vector<double> du = solve_tridiagonal(lower, diag, upper, rhs);
        for (std::size_t i = 0; i < n; ++i) u[i] += du[i];
        f = prob.residual(u);
        res = sup(f);
        if (res < 0.5 * best) {
            best = res;
            best_u = u;
            stall = 0;
        } else {
            if (res < best) {
                best = res;
                best_u = u;
            }
            ++stall;
        }
    }
    // on fine grids the stencil magnitude sets a rounding floor above tol
    double stencil = 0.0;
    for (std::size_t i = 0; i < best_u.size(); ++i) stencil = std::max(stencil, std::abs(prob.st.diag[i] * best_u[i]));
    const double accept = std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * stencil);
    if (!(best < accept)) {
        std::ostringstream os;
        os << "Newton polish stalled at residual " << best;
        throw SolverError("nonconvergence", os.str());
    }
    if (best_u[0] < 0.0)
        for (double& x : best_u) x = -x;
    // below rounding level the Newton iterate is noise; continue the decay geometrically
    const double floor = 1e-16 * best_u[0];
    std::size_t j = 2;
    while (j < best_u.size() && best_u[j] > floor && best_u[j] <= best_u[j - 1]) ++j;
    if (j < best_u.size() && best_u[j - 1] < 1e3 * floor) {
        const double q = std::min(best_u[j - 1] / best_u[j - 2], 1.0 - 1e-3);
        for (std::size_t i = j; i < best_u.size(); ++i) best_u[i] = best_u[i - 1] * q;
    }
    return {best_u, lo, it};
}

inline void check_shape(const std::vector<double>& u)
{
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0)) throw SolverError("zero crossing", "profile is not strictly positive at node " + std::to_string(i));
        if (i > 0 && u[i] > u[i - 1]) throw SolverError("not monotone", "profile increases at node " + std::to_string(i));
    }
}

inline double sup_abs(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

} // namespace detail

/// Ground state of -Delta Q + Q = |x|^{-b} Q^p on the given grid (no trap).
inline GroundStateResult shoot_Q(const ModelParams& m, GridPtr grid, double tol = 1e-8)
{
    if (!m.critical()) throw ParamError("Q is used at the critical power only");
    if (!(tol > 0.0)) throw ParamError("tolerance must be positive");
    if (grid->dim() != m.dim) throw ParamError("grid dimension differs from model dimension");
    detail::StationaryProblem prob(grid, 1.0, 0.0, m.b, m.p, 1.0);
    detail::ShootOutput out = detail::shoot(prob, tol);
    detail::check_shape(out.profile);

    GroundStateResult r;
    r.profile = RadialField::from_real(grid, out.profile);
    r.omega = 1.0;
    r.residual_sup = detail::sup_abs(prob.residual(out.profile));
    ModelParams free = m;
    free.gamma = 0.0;
    free.coupling = 1.0;
    free.omega = 1.0;
    std::tie(r.pohozaev_1, r.pohozaev_2) = pohozaev_residuals(r.profile, free);
    r.mass = mass(r.profile);
    r.energy = energy(r.profile, free);
    r.iterations = out.iterations;
    r.shoot_amplitude = out.u0;
    return r;
}

/// Positive radial solution of the trapped stationary equation at frequency params.omega.
inline GroundStateResult shoot_phi(const ModelParams& m, GridPtr grid, double tol = 1e-8)
{
    const double w = m.omega_value();
    if (!(w > -m.gamma * m.dim)) throw SolverError("omega out of range", "no positive solutions for omega <= -gamma*N");
    if (grid->dim() != m.dim) throw ParamError("grid dimension differs from model dimension");
    if (!(tol > 0.0)) throw ParamError("tolerance must be positive");
    detail::StationaryProblem prob(grid, w, m.gamma, m.b, m.p, m.coupling);
    detail::ShootOutput out = detail::shoot(prob, tol);
    detail::check_shape(out.profile);

    GroundStateResult r;
    r.profile = RadialField::from_real(grid, out.profile);
    r.omega = w;
    r.residual_sup = detail::sup_abs(prob.residual(out.profile));
    std::tie(r.pohozaev_1, r.pohozaev_2) = pohozaev_residuals(r.profile, m);
    r.mass = mass(r.profile);
    r.energy = energy(r.profile, m);
    r.iterations = out.iterations;
    r.shoot_amplitude = out.u0;
    return r;
}

struct FlowOptions {
    std::optional<double> ball_radius;
    double tol = 1e-8;
    int max_iter = 20000;
    double tau = 0.05;
    double tau_max = 20.0;
    /// Growth of ||grad u||^2 over its initial value that is read as an unbounded descent.
    double divergence_factor = 1e4;
    /// Starting profile; defaults to the oscillator ground state scaled to mass q.
    std::optional<RadialField> initial;
    /// Residual below which a mass-constrained Newton polish is attempted.
    double polish_below = 1.0;
    /// Flow iterations between polish attempts.
    int polish_every = 50;
};

/// Current multiplier from the inner product of the stationary equation with u.
inline double flow_multiplier(const RadialField& u, const ModelParams& m)
{
    const double q = mass(u);
    return (m.coupling * potential_P(u, m) - grad_norm_sq(u) - m.gamma * m.gamma * variance(u)) / q;
}

/// Residual of -Delta u + gamma^2 r^2 u + omega u - coupling r^{-b}|u|^{p-1}u.
inline std::vector<cplx> stationary_residual(const RadialField& u, const ModelParams& m, double omega)
{
    std::vector<cplx> f = neg_laplacian(u);
    const auto& g = u.grid();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = g.r(i);
        f[i] += (m.gamma * m.gamma * r * r + omega) * u[i]
            - m.coupling * std::pow(r, -m.b) * std::pow(std::abs(u[i]), m.p - 1.0) * u[i];
    }
    return f;
}

inline double sup_abs(const std::vector<cplx>& v)
{
    double s = 0.0;
    for (const auto& z : v) s = std::max(s, std::abs(z));
    return s;
}

namespace detail {

/**
 * Newton iteration on (u, omega) for the stationary equation with the mass
 * fixed to q; the bordered Jacobian is eliminated with two tridiagonal solves.
 * Returns false when it fails to reach tol.
 */
inline bool constrained_newton(std::vector<double>& u, double& omega, double q, const ModelParams& m, const RadialGrid& g,
                               const LaplacianStencil& st, double tol, int max_iter = 30)
{
    const std::size_t n = u.size();
    std::vector<double> trap(n), rb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = g.r(i);
        trap[i] = m.gamma * m.gamma * r * r;
        rb[i] = m.coupling * std::pow(r, -m.b);
    }
    auto residual = [&](const std::vector<double>& v, double w, double& msum) {
        std::vector<double> f = apply_stencil(st, v);
        msum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += (trap[i] + w) * v[i] - rb[i] * std::pow(std::abs(v[i]), m.p - 1.0) * v[i];
            msum += g.weight(i) * v[i] * v[i];
        }
        return f;
    };
    double M = 0.0;
    std::vector<double> f = residual(u, omega, M);
    for (int it = 0; it < max_iter; ++it) {
        double res = 0.0;
        for (double x : f) res = std::max(res, std::abs(x));
        if (res < tol && std::abs(M - q) < 1e-12 * q) return true;
        std::vector<double> diag(n), a(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = st.diag[i] + trap[i] + omega - m.p * rb[i] * std::pow(std::abs(u[i]), m.p - 1.0);
            a[i] = -f[i];
            c[i] = u[i];
        }
        try {
            a = solve_tridiagonal(st.lower, diag, st.upper, a);
            c = solve_tridiagonal(st.lower, diag, st.upper, c);
        } catch (const LinearSolveError&) {
            return false;
        }
        double wa = 0.0, wc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            wa += g.weight(i) * u[i] * a[i];
            wc += g.weight(i) * u[i] * c[i];
        }
        if (wc == 0.0) return false;
        const double dw = (wa - 0.5 * (q - M)) / wc;
        for (std::size_t i = 0; i < n; ++i) u[i] += a[i] - dw * c[i];
        omega += dw;
        f = residual(u, omega, M);
        for (double x : u)
            if (!std::isfinite(x)) return false;
    }
    double res = 0.0;
    for (double x : f) res = std::max(res, std::abs(x));
    return res < tol && std::abs(M - q) < 1e-12 * q;
}

} // namespace detail

/**
 * Energy descent on the sphere ||u||^2 = q: implicit oscillator part, explicit
 * focusing term, rescaling to mass q after every step. A step that would raise
 * the energy is retried with half the step size, so the accepted sequence is
 * nonincreasing in energy. Near convergence a mass-constrained Newton polish
 * is tried; it is kept only if the result is positive, monotone and not
 * higher in energy.
 */
inline GroundStateResult normalized_gradient_flow(double q, const ModelParams& m, GridPtr grid, const FlowOptions& opt = {})
{
    if (!(q > 0.0)) throw ParamError("mass target q must be positive");
    if (grid->dim() != m.dim) throw ParamError("grid dimension differs from model dimension");
    const double gN = m.gamma * m.dim;
    if (opt.ball_radius) {
        if (!(*opt.ball_radius > 0.0)) throw ParamError("ball radius must be positive");
        if (q * gN > *opt.ball_radius)
            throw SolverError("constraint set empty", "q exceeds ball_radius/(gamma*N)");
    }
    const std::size_t n = grid->size();
    const LaplacianStencil st = neg_laplacian_stencil(*grid);
    std::vector<double> trap(n), rb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = grid->r(i);
        trap[i] = m.gamma * m.gamma * r * r;
        rb[i] = m.coupling * std::pow(r, -m.b);
    }

    std::vector<double> u(n);
    if (opt.initial) {
        if (opt.initial->size() != n) throw ParamError("initial profile does not match grid");
        for (std::size_t i = 0; i < n; ++i) u[i] = std::abs((*opt.initial)[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(-0.5 * m.gamma * grid->r(i) * grid->r(i));
    }
    auto as_field = [&](const std::vector<double>& v) { return RadialField::from_real(grid, v); };
    auto renorm = [&](std::vector<double>& v) {
        const double s = std::sqrt(q / mass(as_field(v)));
        for (double& x : v) x *= s;
    };
    renorm(u);

    double E = energy(as_field(u), m);
    const double G0 = grad_norm_sq(as_field(u));
    double tau = opt.tau;
    GroundStateResult res;
    res.energy_history.push_back(E);
    int it = 0;
    double resid = std::numeric_limits<double>::infinity();
    double omega = 0.0;
    for (; it < opt.max_iter; ++it) {
        RadialField uf = as_field(u);
        omega = flow_multiplier(uf, m);
        resid = sup_abs(stationary_residual(uf, m, omega));
        if (resid < opt.tol) break;
        if (resid < opt.polish_below && it % opt.polish_every == 0) {
            std::vector<double> v = u;
            double w = omega;
            if (detail::constrained_newton(v, w, q, m, *grid, st, opt.tol)) {
                bool shape_ok = true;
                for (std::size_t i = 0; i < n && shape_ok; ++i) shape_ok = v[i] > 0.0 && (i == 0 || v[i] <= v[i - 1]);
                const double Ev = energy(as_field(v), m);
                if (shape_ok && Ev <= E + 1e-10 * std::max(1.0, std::abs(E))) {
                    u = std::move(v);
                    E = Ev;
                    res.energy_history.push_back(E);
                    omega = flow_multiplier(as_field(u), m);
                    resid = sup_abs(stationary_residual(as_field(u), m, omega));
                    if (resid < opt.tol) break;
                }
            }
        }

        bool accepted = false;
        for (int tries = 0; tries < 60 && !accepted; ++tries) {
            std::vector<double> lower(n), diag(n), upper(n), rhs(n);
            for (std::size_t i = 0; i < n; ++i) {
                lower[i] = tau * st.lower[i];
                upper[i] = tau * st.upper[i];
                diag[i] = 1.0 + tau * (st.diag[i] + trap[i]);
                rhs[i] = u[i] + tau * rb[i] * std::pow(std::abs(u[i]), m.p - 1.0) * u[i];
            }
            ThomasFactor<double> fac(lower, diag, upper);
            fac.solve_in_place(rhs);
            renorm(rhs);
            const double En = energy(as_field(rhs), m);
            if (En <= E + 1e-13 * std::max(1.0, std::abs(E))) {
                u = std::move(rhs);
                E = En;
                accepted = true;
                tau = std::min(tau * 1.25, opt.tau_max);
            } else {
                tau *= 0.5;
            }
        }
        if (!accepted) throw SolverError("nonconvergence", "no energy-decreasing step found");
        res.energy_history.push_back(E);

        const RadialField cur = as_field(u);
        const double G = grad_norm_sq(cur);
        if (G > opt.divergence_factor * G0)
            throw SolverError("energy unbounded", "gradient norm grows without bound along the descent");
        if (opt.ball_radius && G + m.gamma * m.gamma * variance(cur) >= *opt.ball_radius)
            throw SolverError("nonconvergence", "descent left the ball B_r");
    }
    if (!(resid < opt.tol)) throw SolverError("nonconvergence", "gradient flow did not reach tolerance");

    res.profile = as_field(u);
    res.omega = omega;
    res.residual_sup = resid;
    ModelParams mw = m;
    mw.omega = omega;
    std::tie(res.pohozaev_1, res.pohozaev_2) = pohozaev_residuals(res.profile, mw);
    res.mass = mass(res.profile);
    res.energy = E;
    res.iterations = it;
    if (opt.ball_radius) {
        const double H = grad_norm_sq(res.profile) + m.gamma * m.gamma * variance(res.profile);
        if (!(H <= 0.99 * *opt.ball_radius))
            throw SolverError("not interior", "minimizer is not strictly inside B_r");
    }
    return res;
}

struct UniquenessReport {
    double A = 0.0, B = 0.0, C = 0.0;
    /// Positive root of A s^2 + B s + C (0 when G has no positive root).
    double k = 0.0;
    /// Middle coefficient obtained by differentiating the definitions of a, beta, c directly.
    double B_derived = 0.0;
    /// Radius at which G changes sign, using the derived middle coefficient and s = r^2.
    double k_radius = 0.0;
    std::vector<double> r, a_of_r, beta_of_r, c_of_r;
    int sign_changes = 0;
    bool conditions_hold = false;
};

inline double positive_root(double A, double B, double C)
{
    if (A == 0.0) return B != 0.0 && -C / B > 0.0 ? -C / B : 0.0;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return 0.0;
    const double sq = std::sqrt(disc);
    const double qv = -0.5 * (B + (B >= 0.0 ? sq : -sq));
    double best = 0.0;
    for (double root : {qv / A, qv != 0.0 ? C / qv : 0.0})
        if (root > 0.0) best = std::max(best, root);
    return best;
}

/// Coefficients of the sign function in the uniqueness criterion, with gamma normalized to 1.
inline UniquenessReport uniqueness_monitor(int N, double b, double p, double omega, const std::vector<double>& radii = {})
{
    if (N < 3 || !(b > 0.0) || b >= 1.0) throw ParamError("outside uniqueness hypotheses (need N>=3, 0<b<1)");
    if (!(p > 1.0 && p < upper_power(N, b))) throw ParamError("outside uniqueness hypotheses (need 1<p<upper power)");
    UniquenessReport u;
    const double p3 = p + 3.0;
    u.A = -p3 * p3 * (2.0 * b + N * (p - 1.0) + 4.0);
    u.B = omega * p3 * p3 * (2.0 * N - (2.0 + b));
    u.C = (b - 2.0 * N + 2.0) * (p * (N - 2.0) + b + N - 4.0) * (p * (N - 2.0) + 2.0 * b - N - 2.0);
    u.k = positive_root(u.A, u.B, u.C);
    u.B_derived = -omega * p3 * p3 * (N * (p - 1.0) + 2.0 * b - p + 1.0);
    u.k_radius = std::sqrt(positive_root(u.A, u.B_derived, u.C));

    const double e = 2.0 * (b + (N - 1.0) * (p + 1.0)) / p3;
    const double kb = (2.0 * N - b - 2.0) / p3;
    const double kc = kb * (N - e);
    u.r = radii;
    for (double r : radii) {
        u.a_of_r.push_back(std::pow(r, e));
        u.beta_of_r.push_back(kb * std::pow(r, e - 1.0));
        u.c_of_r.push_back(kc * std::pow(r, e - 2.0));
    }
    // sign pattern of A s^2 + B s + C on s in (0, inf): sampled on a log scale
    int prev = 0;
    for (int j = -600; j <= 600; ++j) {
        const double s = std::pow(10.0, j / 100.0);
        const double G = (u.A * s + u.B) * s + u.C;
        const int sg = G > 0.0 ? 1 : (G < 0.0 ? -1 : 0);
        if (sg != 0 && prev != 0 && sg != prev) ++u.sign_changes;
        if (sg != 0) prev = sg;
    }
    const bool limits_ok = e > 0.0 && e - 1.0 >= 0.0;
    u.conditions_hold = omega > -N && u.A < 0.0 && u.C >= 0.0 && u.sign_changes <= 1 && limits_ok;
    return u;
}

} // namespace igp
