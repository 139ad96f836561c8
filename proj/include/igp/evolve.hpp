#pragma once

#include "core.hpp"
#include "functionals.hpp"
#include "tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace igp {

struct EvolveConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    /// Drop the trap term (free inhomogeneous NLS).
    bool free_equation = false;
    double blowup_gradient_factor = 1e3;
    int record_every = 1;
    /// Times at which the state is stored; the integrator lands on them exactly.
    std::vector<double> snapshot_times;
};

struct DiagnosticSeries {
    std::vector<double> t, mass, energy, grad_sq, f, f_prime, potential;

    std::size_t size() const { return t.size(); }
};

struct Snapshot {
    double t = 0.0;
    RadialField u;
};

struct EvolveResult {
    RadialField final_state;
    double t_final = 0.0;
    std::vector<Snapshot> snapshots;
    DiagnosticSeries series;
    std::optional<double> blowup_time;
    /// Set when a non-finite value stopped the run; t_final is then the last valid time.
    bool aborted_nan = false;
};

/// 4 Im sum ubar (x . grad u), from face differences.
inline double variance_rate(const RadialField& u)
{
    const auto& g = u.grid();
    const std::size_t n = u.size();
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) s += g.face_weight(j) * g.face_r(j) * std::imag(std::conj(u[j]) * u[j + 1]);
    return 4.0 * s / g.h();
}

namespace detail {

inline double grad_sq_raw(const RadialGrid& g, const std::vector<cplx>& u)
{
    const std::size_t n = u.size();
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) s += g.face_weight(j) * std::norm(u[j + 1] - u[j]);
    s += g.face_weight(n - 1) * std::norm(u[n - 1]);
    return s / (g.h() * g.h());
}

} // namespace detail

/// Model seen by the integrator: the free equation carries no trap.
inline ModelParams dynamics_params(const ModelParams& m, bool free_equation)
{
    ModelParams e = m;
    if (free_equation) e.gamma = 0.0;
    return e;
}

/**
 * Strang splitting: exact local phase for trap plus focusing term over dt/2,
 * Crank-Nicolson for the radial Laplacian over dt, local phase again.
 */
class SplitStepper {
public:
    SplitStepper(const ModelParams& m, GridPtr grid, double dt)
        : m_(m), grid_(std::move(grid)), st_(neg_laplacian_stencil(*grid_)), dt_(dt)
    {
        const std::size_t n = grid_->size();
        trap_.resize(n);
        rb_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = grid_->r(i);
            trap_[i] = m.gamma * m.gamma * r * r;
            rb_[i] = m.coupling * std::pow(r, -m.b);
        }
        main_ = factor(dt);
    }

    void step(std::vector<cplx>& u, double dt) const
    {
        if (dt == dt_) {
            advance(u, dt, main_);
        } else {
            const ThomasFactor<cplx> f = factor(dt);
            advance(u, dt, f);
        }
    }

private:
    ThomasFactor<cplx> factor(double dt) const
    {
        const std::size_t n = grid_->size();
        const cplx a(0.0, 0.5 * dt);
        std::vector<cplx> lo(n), di(n), up(n);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = a * st_.lower[i];
            di[i] = 1.0 + a * st_.diag[i];
            up[i] = a * st_.upper[i];
        }
        return ThomasFactor<cplx>(lo, di, up);
    }

    void phase(std::vector<cplx>& u, double tau) const
    {
        const double pm1 = m_.p - 1.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double re = u[i].real(), im = u[i].imag();
            const double theta = tau * (-trap_[i] + rb_[i] * modulus_power(re * re + im * im, pm1));
            const double c = std::cos(theta), s = std::sin(theta);
            u[i] = cplx(re * c - im * s, re * s + im * c);
        }
    }

    void advance(std::vector<cplx>& u, double dt, const ThomasFactor<cplx>& f) const
    {
        phase(u, 0.5 * dt);
        const std::size_t n = u.size();
        const cplx a(0.0, 0.5 * dt);
        std::vector<cplx> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            cplx v = st_.diag[i] * u[i];
            if (i > 0) v += st_.lower[i] * u[i - 1];
            if (i + 1 < n) v += st_.upper[i] * u[i + 1];
            rhs[i] = u[i] - a * v;
        }
        f.solve_in_place(rhs);
        u.swap(rhs);
        phase(u, 0.5 * dt);
    }

    ModelParams m_;
    GridPtr grid_;
    LaplacianStencil st_;
    double dt_;
    std::vector<double> trap_, rb_;
    ThomasFactor<cplx> main_;
};

inline void record_diagnostics(DiagnosticSeries& s, double t, const RadialField& u, const ModelParams& m)
{
    const double M = mass(u), G = grad_norm_sq(u), V = variance(u), P = potential_P(u, m);
    s.t.push_back(t);
    s.mass.push_back(M);
    s.grad_sq.push_back(G);
    s.f.push_back(V);
    s.potential.push_back(P);
    s.energy.push_back(0.5 * G + 0.5 * m.gamma * m.gamma * V - m.coupling * P / (m.p + 1.0));
    s.f_prime.push_back(variance_rate(u));
}

inline EvolveResult evolve(const RadialField& u0, const ModelParams& params, const EvolveConfig& cfg)
{
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw ParamError("evolve requires dt > 0 and t_end > 0");
    if (cfg.record_every < 1) throw ParamError("record_every must be >= 1");
    const ModelParams m = dynamics_params(params, cfg.free_equation);
    const GridPtr grid = u0.grid_ptr();
    const SplitStepper stepper(m, grid, cfg.dt);

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    EvolveResult res;
    std::vector<cplx> u = u0.values();
    auto field = [&] { return RadialField(grid, u); };
    record_diagnostics(res.series, 0.0, u0, m);
    const double G0 = res.series.grad_sq.front();
    while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
        res.snapshots.push_back({snaps[next_snap], u0});
        ++next_snap;
    }

    const long nsteps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    double t = 0.0;
    std::vector<cplx> last_valid = u;
    for (long k = 1; k <= nsteps; ++k) {
        const double t_next = std::min(static_cast<double>(k) * cfg.dt, cfg.t_end);
        double t_cur = t;
        while (next_snap < snaps.size() && snaps[next_snap] < t_next - 1e-12) {
            const double ts = snaps[next_snap];
            if (ts - t_cur > 1e-14) stepper.step(u, ts - t_cur);
            t_cur = ts;
            res.snapshots.push_back({ts, RadialField(grid, u)});
            ++next_snap;
        }
        if (t_next - t_cur > 1e-14) stepper.step(u, t_next - t_cur);
        t = t_next;

        const double G = detail::grad_sq_raw(*grid, u);
        if (!std::isfinite(G)) {
            res.aborted_nan = true;
            u = last_valid;
            t = static_cast<double>(k - 1) * cfg.dt;
            break;
        }
        last_valid = u;
        while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
            res.snapshots.push_back({snaps[next_snap], field()});
            ++next_snap;
        }

        const bool blown = G > cfg.blowup_gradient_factor * G0;
        if (k % cfg.record_every == 0 || k == nsteps || blown) record_diagnostics(res.series, t, field(), m);
        if (blown) {
            res.blowup_time = t;
            break;
        }
    }
    res.final_state = field();
    res.t_final = t;
    return res;
}

struct VirialCheck {
    double max_deviation = 0.0;
    double max_abs_f = 0.0;
    /// Samples that entered the comparison.
    std::size_t samples = 0;
};

/// Amplitude and phase of the sinusoidal variance at the critical power.
struct VirialSinusoid {
    double amplitude = 0.0;
    double phase = 0.0;
    double mean = 0.0;
    double omega_t = 0.0;

    double operator()(double t) const { return amplitude * std::sin(omega_t * t + phase) + mean; }
};

inline VirialSinusoid variance_sinusoid(double f0, double fp0, double E, double gamma)
{
    VirialSinusoid s;
    s.mean = E / (gamma * gamma);
    const double sn = f0 - s.mean;
    const double cs = fp0 / (4.0 * gamma);
    s.amplitude = std::sqrt(sn * sn + cs * cs);
    s.phase = std::atan2(sn, cs);
    s.omega_t = 4.0 * gamma;
    return s;
}

/**
 * Critical power: compare f(t) with the sinusoid fixed by f(0), f'(0), E(0).
 * Otherwise: residual of f'' = 16E + 4/(p+1) (N - Np - 2b + 4) P - 16 gamma^2 f
 * with centred second differences of the recorded f (uniform record spacing).
 */
inline VirialCheck virial_check(const DiagnosticSeries& s, const ModelParams& m, double horizon = 1e300, bool free_equation = false)
{
    if (s.size() < 3) throw ParamError("horizon too short to fit");
    const double g = free_equation ? 0.0 : m.gamma;
    VirialCheck out;
    if (m.critical() && g > 0.0) {
        const VirialSinusoid fit = variance_sinusoid(s.f[0], s.f_prime[0], s.energy[0], g);
        for (std::size_t i = 0; i < s.size() && s.t[i] <= horizon; ++i) {
            out.max_deviation = std::max(out.max_deviation, std::abs(s.f[i] - fit(s.t[i])));
            out.max_abs_f = std::max(out.max_abs_f, std::abs(s.f[i]));
            ++out.samples;
        }
        return out;
    }
    const double cP = 4.0 / (m.p + 1.0) * (m.dim - m.dim * m.p - 2.0 * m.b + 4.0) * m.coupling;
    const double dt0 = s.t[1] - s.t[0];
    for (std::size_t i = 1; i + 1 < s.size() && s.t[i + 1] <= horizon; ++i) {
        const double a = s.t[i] - s.t[i - 1], b = s.t[i + 1] - s.t[i];
        if (std::abs(a - dt0) > 1e-9 * dt0 || std::abs(b - dt0) > 1e-9 * dt0) break;
        const double fpp = (s.f[i + 1] - 2.0 * s.f[i] + s.f[i - 1]) / (dt0 * dt0);
        const double rhs = 16.0 * s.energy[i] + cP * s.potential[i] - 16.0 * g * g * s.f[i];
        out.max_deviation = std::max(out.max_deviation, std::abs(fpp - rhs));
        out.max_abs_f = std::max(out.max_abs_f, std::abs(s.f[i]));
        ++out.samples;
    }
    if (out.samples == 0) throw ParamError("horizon too short to fit");
    return out;
}

/**
 * First zero of the variance sinusoid when f(0) >= 2 E / gamma^2. The slack
 * admits data sitting on the boundary of the criterion up to quadrature error.
 */
inline std::optional<double> predict_collapse_time(const RadialField& u0, const ModelParams& m, double slack = 1e-6)
{
    if (!m.critical()) throw ParamError("collapse-time prediction applies at the critical power");
    const double g2 = m.gamma * m.gamma;
    const double f0 = variance(u0);
    const double fp0 = variance_rate(u0);
    const double E = energy(u0, m);
    if (!(f0 >= 2.0 * E / g2 - slack * (std::abs(f0) + 2.0 * std::abs(E) / g2))) return std::nullopt;
    const VirialSinusoid s = variance_sinusoid(f0, fp0, E, m.gamma);
    if (!(s.amplitude > 0.0)) return std::nullopt;
    const double target = std::clamp(-s.mean / s.amplitude, -1.0, 1.0);
    const double base = std::asin(target);
    const double two_pi = 2.0 * std::numbers::pi;
    double best = std::numeric_limits<double>::infinity();
    for (double cand0 : {base, std::numbers::pi - base}) {
        double c = cand0;
        while (c <= s.phase + 1e-14) c += two_pi;
        while (c - two_pi > s.phase + 1e-14) c -= two_pi;
        best = std::min(best, c);
    }
    return (best - s.phase) / s.omega_t;
}

} // namespace igp
