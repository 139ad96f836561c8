#pragma once

#include "core.hpp"
#include "evolve.hpp"
#include "exact.hpp"
#include "functionals.hpp"
#include "groundstate.hpp"
#include "interpolate.hpp"
#include "tridiagonal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace igp {

/// Run job(i) for i in [0, n) on up to `workers` threads; the first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// Scalings

inline RadialField scale_amplitude(const RadialField& u, double lambda) { return u.scaled(lambda); }

/// (4 - 2b - (N-2)(p-1)) / (p-1): growth rate of ||grad v_mu||^2 under the dilation below.
inline double dilation_exponent(const ModelParams& m)
{
    return (4.0 - 2.0 * m.b - (m.dim - 2.0) * (m.p - 1.0)) / (m.p - 1.0);
}

struct DilatedField {
    RadialField field;
    double exponent = 0.0;
};

/// mu^{(2-b)/(p-1)} u(mu x), resampled on the grid of u.
inline DilatedField scale_dilation_a(const RadialField& u, double mu, const ModelParams& m)
{
    if (!(mu > 0.0)) throw ParamError("scaling factor must be positive");
    return {resample(u, u.grid_ptr(), mu).scaled(std::pow(mu, (2.0 - m.b) / (m.p - 1.0))), dilation_exponent(m)};
}

/// mu^{N/2} u(mu x).
inline RadialField scale_mass_preserving(const RadialField& u, double mu)
{
    if (!(mu > 0.0)) throw ParamError("scaling factor must be positive");
    return resample(u, u.grid_ptr(), mu).scaled(std::pow(mu, 0.5 * u.grid().dim()));
}

/// mu^{(N-b)/(p+1)} u(mu x).
inline RadialField scale_glo(const RadialField& u, double mu, const ModelParams& m)
{
    if (!(mu > 0.0)) throw ParamError("scaling factor must be positive");
    return resample(u, u.grid_ptr(), mu).scaled(std::pow(mu, (m.dim - m.b) / (m.p + 1.0)));
}

// ---------------------------------------------------------------------------
// Threshold sweep

enum class SweepOutcome { global_bounded, blowup };

inline const char* to_string(SweepOutcome o) { return o == SweepOutcome::blowup ? "blowup" : "global_bounded"; }

struct SweepRow {
    double c = 0.0;
    double lambda = 0.0;
    SweepOutcome outcome = SweepOutcome::global_bounded;
    std::optional<double> t_blow;
    std::optional<double> t_pred;
    double max_grad_ratio = 0.0;
    /// 2E(u0) <= gamma^2 f(0), evaluated on the grid.
    bool criterion_holds = false;
    /// Solver failure for this row, empty when the run completed.
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

struct SweepConfig {
    double h = 2e-3;
    double rmax = 8.0;
    double dt = 1e-3;
    /// Defaults to pi / gamma when unset.
    std::optional<double> horizon;
    double blowup_gradient_factor = 1e3;
    unsigned workers = 1;
};

/// c lambda^{N/2} Q(lambda x) on g with Q sampled at the nodes lambda r_i.
inline RadialField threshold_datum(const ModelParams& m, double c, double lambda, GridPtr g)
{
    const RadialField Qd = aligned_profile(m, lambda, *g);
    std::vector<cplx> v(g->size());
    const double amp = c * std::pow(lambda, 0.5 * m.dim);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = amp * Qd[i];
    return RadialField(std::move(g), std::move(v));
}

inline SweepResult threshold_sweep(const ModelParams& m, const std::vector<double>& c_values, const std::vector<double>& lambda_values,
                                   const SweepConfig& cfg)
{
    if (!m.critical()) throw ParamError("threshold sweep runs at the critical power");
    const GridPtr g = make_grid(m.dim, cfg.h, cfg.rmax);
    SweepResult out;
    for (double lam : lambda_values)
        for (double c : c_values) {
            SweepRow row;
            row.c = c;
            row.lambda = lam;
            out.rows.push_back(row);
        }
    const double horizon = cfg.horizon.value_or(std::numbers::pi / m.gamma);
    parallel_for(out.rows.size(), cfg.workers, [&](std::size_t k) {
        SweepRow& row = out.rows[k];
        try {
            const RadialField u0 = threshold_datum(m, row.c, row.lambda, g);
            row.criterion_holds = 2.0 * energy(u0, m) <= m.gamma * m.gamma * variance(u0);
            row.t_pred = predict_collapse_time(u0, m);
            EvolveConfig ec;
            ec.dt = cfg.dt;
            ec.t_end = horizon;
            ec.blowup_gradient_factor = cfg.blowup_gradient_factor;
            ec.record_every = std::max(1, static_cast<int>(std::lround(0.01 / cfg.dt)));
            const EvolveResult r = evolve(u0, m, ec);
            const auto& G = r.series.grad_sq;
            row.max_grad_ratio = *std::max_element(G.begin(), G.end()) / G.front();
            if (r.blowup_time || r.aborted_nan) {
                row.outcome = SweepOutcome::blowup;
                row.t_blow = r.blowup_time.value_or(r.t_final);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Variational levels

/// lambda0 = (||u||^2_{H_omega} / P(u))^{1/(p-1)}, so that K_omega(lambda0 u) = 0.
inline double nehari_factor(const RadialField& u, const ModelParams& m)
{
    const double P = m.coupling * potential_P(u, m);
    if (!(P > 0.0)) throw SolverError("degenerate trial", "P(u) = 0, the trial cannot be projected");
    const double H = h_omega_norm_sq(u, m);
    if (!(H > 0.0)) throw SolverError("degenerate trial", "||u||_{H_omega} vanishes");
    return std::pow(H / P, 1.0 / (m.p - 1.0));
}

inline RadialField nehari_project(const RadialField& u, const ModelParams& m) { return u.scaled(nehari_factor(u, m)); }

/// Action on the Nehari set along the ray through u.
inline double nehari_action(const RadialField& u, const ModelParams& m) { return action_S(nehari_project(u, m), m); }

/**
 * Positive solution of the stationary equation by Petviashvili iteration
 * u <- M^{p/(p-1)} L^{-1} N(u), L = -Delta + gamma^2 r^2 + omega, started
 * from u.
 */
inline RadialField petviashvili(const RadialField& start, const ModelParams& m, int iterations = 400, double tol = 1e-11)
{
    const auto& g = start.grid();
    const std::size_t n = g.size();
    const double w = m.omega_value();
    const LaplacianStencil st = neg_laplacian_stencil(g);
    std::vector<double> lower = st.lower, diag(n), upper = st.upper, rb(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = g.r(i);
        diag[i] = st.diag[i] + m.gamma * m.gamma * r * r + w;
        rb[i] = m.coupling * std::pow(r, -m.b);
    }
    const ThomasFactor<double> L(lower, diag, upper);
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::abs(start[i]);
    const double alpha = m.p / (m.p - 1.0);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> Nu(n);
        double uLu = 0.0, uNu = 0.0;
        const std::vector<double> Lu = apply_stencil(st, u);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = g.r(i);
            Nu[i] = rb[i] * std::pow(std::abs(u[i]), m.p - 1.0) * u[i];
            uLu += g.weight(i) * u[i] * (Lu[i] + (m.gamma * m.gamma * r * r + w) * u[i]);
            uNu += g.weight(i) * u[i] * Nu[i];
        }
        if (!(uNu > 0.0)) throw SolverError("degenerate trial", "Petviashvili iterate lost its focusing part");
        const double M = std::pow(uLu / uNu, alpha);
        L.solve_in_place(Nu);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double next = M * Nu[i];
            diff = std::max(diff, std::abs(next - u[i]));
            scale = std::max(scale, std::abs(next));
            u[i] = next;
        }
        if (!std::isfinite(scale)) throw SolverError("nonconvergence", "Petviashvili iteration diverged");
        if (diff < tol * scale) break;
    }
    return RadialField::from_real(start.grid_ptr(), u);
}

struct DOmegaEstimate {
    /// Minimum over the shooting profile and its perturbations.
    double seeded = 0.0;
    /// Minimum over random Gaussian-mixture seeds refined by Petviashvili iteration.
    double random_restart = 0.0;
    double value = 0.0;
    int trial_count = 0;
};

struct LevelOptions {
    double h = 2e-3;
    double rmax = 8.0;
    int random_trials = 200;
    int seeded_trials = 20;
    double perturbation = 0.05;
    std::uint64_t seed = 1;
    unsigned workers = 1;
};

namespace detail {

inline RadialField gaussian_mixture(GridPtr g, std::mt19937_64& rng, double gamma)
{
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> amp(0.2, 2.0), centre(0.0, 2.0), width(0.3, 2.0);
    const int k = count(rng);
    std::vector<double> a(k), c(k), s(k);
    for (int j = 0; j < k; ++j) {
        a[j] = amp(rng);
        c[j] = centre(rng) / std::sqrt(gamma);
        s[j] = width(rng) / std::sqrt(gamma);
    }
    return RadialField::sample(std::move(g), [&](double r) {
        double v = 0.0;
        for (int j = 0; j < k; ++j) v += a[j] * std::exp(-0.5 * (r - c[j]) * (r - c[j]) / (s[j] * s[j]));
        return v;
    });
}

} // namespace detail

inline DOmegaEstimate estimate_d_omega(const ModelParams& m, const LevelOptions& opt = {})
{
    const double w = m.omega_value();
    if (!(w > -m.gamma * m.dim)) throw ParamError("omega must satisfy omega > -gamma*N");
    ModelParams mw = m.with_omega(w);
    const GridPtr g = make_grid(m.dim, opt.h, opt.rmax);
    const RadialField phi = shoot_phi(mw, g).profile;

    DOmegaEstimate est;
    est.seeded = nehari_action(phi, mw);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < opt.seeded_trials; ++k) {
        const RadialField bump = detail::gaussian_mixture(g, rng, m.gamma);
        const double scale = opt.perturbation * std::sqrt(mass(phi) / mass(bump)) * normal(rng);
        const RadialField trial = phi + bump.scaled(scale);
        est.seeded = std::min(est.seeded, nehari_action(trial, mw));
    }

    std::vector<RadialField> seeds;
    for (int k = 0; k < opt.random_trials; ++k) seeds.push_back(detail::gaussian_mixture(g, rng, m.gamma));
    std::vector<double> vals(seeds.size(), std::numeric_limits<double>::infinity());
    parallel_for(seeds.size(), opt.workers, [&](std::size_t k) {
        try {
            vals[k] = nehari_action(petviashvili(seeds[k], mw), mw);
        } catch (const SolverError&) {
        }
    });
    est.random_restart = *std::min_element(vals.begin(), vals.end());
    if (!std::isfinite(est.random_restart)) throw SolverError("degenerate trial", "every random trial degenerated");
    est.value = std::min(est.seeded, est.random_restart);
    est.trial_count = 1 + opt.seeded_trials + opt.random_trials;
    return est;
}

struct CrossConstrainedPoint {
    double lambda = 0.0;
    double mu = 0.0;
    /// Root of the continuous scaling law, mu^4 = gamma^2 V / A.
    double mu_analytic = 0.0;
    double S = 0.0, K = 0.0, I = 0.0, grad_sq = 0.0;
    RadialField v;
};

struct DnEstimate {
    double value = std::numeric_limits<double>::infinity();
    std::vector<CrossConstrainedPoint> points;
};

/**
 * Point on {K < 0, I = 0} from the ray lambda * phi: dilate by
 * mu^{(2-b)/(p-1)} v(mu x) and bisect mu on the discrete I.
 */
inline CrossConstrainedPoint cross_constrained_point(const RadialField& phi, double lambda, const ModelParams& m, double rel_tol = 1e-9)
{
    const RadialField v = phi.scaled(lambda);
    const double G = grad_norm_sq(v), V = variance(v), P = m.coupling * potential_P(v, m);
    const double A = G - virial_coefficient(m) * P;
    if (!(A > 0.0)) throw SolverError("no sign change bracket", "A(lambda) <= 0, the dilation never reaches I = 0");
    CrossConstrainedPoint pt;
    pt.lambda = lambda;
    pt.mu_analytic = std::pow(m.gamma * m.gamma * V / A, 0.25);
    auto I_at = [&](double mu) { return virial_I(scale_dilation_a(v, mu, m).field, m); };
    double lo = pt.mu_analytic / 1.25, hi = pt.mu_analytic * 1.25;
    for (int k = 0; k < 40 && !(I_at(lo) < 0.0); ++k) lo /= 1.25;
    for (int k = 0; k < 40 && !(I_at(hi) > 0.0); ++k) hi *= 1.25;
    if (!(I_at(lo) < 0.0) || !(I_at(hi) > 0.0)) throw SolverError("no sign change bracket", "I does not change sign along the dilation");
    RadialField best;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        best = scale_dilation_a(v, mid, m).field;
        const double I = virial_I(best, m);
        pt.mu = mid;
        if (std::abs(I) < rel_tol * grad_norm_sq(best)) break;
        (I < 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-15 * hi) break;
    }
    const FunctionalReport r = report(best, m.with_omega(m.omega_value()));
    pt.S = r.S_omega;
    pt.K = r.K_omega;
    pt.I = r.I;
    pt.grad_sq = r.grad_sq;
    pt.v = std::move(best);
    return pt;
}

/// lambda-window (lo, hi) where the dilation of lambda * phi ends with K < 0 at omega = 0.
inline std::pair<double, double> cross_constrained_window(const RadialField& phi, const ModelParams& m)
{
    const double G = grad_norm_sq(phi), P = m.coupling * potential_P(phi, m);
    const double cI = virial_coefficient(m);
    const double e = 1.0 / (m.p - 1.0);
    return {std::pow(2.0 * G / ((1.0 + cI) * P), e), std::pow(G / (cI * P), e)};
}

/**
 * Upper bound for the cross-constrained level: best action over points built
 * from lambda * phi, lambda spread over the admissible window. Only points with
 * K < 0 and |I| < 1e-8 ||grad v||^2 are kept.
 */
inline DnEstimate estimate_d_n_upper(const ModelParams& m, const RadialField& phi, int trials = 16)
{
    if (m.criticality == Criticality::subcritical) throw ParamError("cross-constrained level needs critical or supercritical p");
    if (trials < 1) throw ParamError("trials must be >= 1");
    auto [lo, hi] = cross_constrained_window(phi, m);
    lo = std::max(lo, 1.0);
    if (!(hi > lo)) throw SolverError("no sign change bracket", "no admissible amplitude window");
    DnEstimate est;
    for (int k = 0; k < trials; ++k) {
        const double lam = lo + (hi - lo) * (k + 0.5) / trials;
        CrossConstrainedPoint pt = cross_constrained_point(phi, lam, m);
        if (!(pt.K < 0.0) || !(std::abs(pt.I) < 1e-8 * pt.grad_sq)) continue;
        est.value = std::min(est.value, pt.S);
        est.points.push_back(std::move(pt));
    }
    if (est.points.empty()) throw SolverError("no sign change bracket", "no trial reached the cross-constrained set");
    return est;
}

struct LevelEstimates {
    double d_omega = 0.0;
    double d_n_upper = 0.0;
    double d = 0.0;
    int trial_count = 0;
};

inline LevelEstimates estimate_levels(const ModelParams& m, const LevelOptions& opt = {}, int dn_trials = 16)
{
    const DOmegaEstimate dw = estimate_d_omega(m, opt);
    const GridPtr g = make_grid(m.dim, opt.h, opt.rmax);
    const ModelParams mw = m.with_omega(m.omega_value());
    const RadialField phi = shoot_phi(mw, g).profile;
    const DnEstimate dn = estimate_d_n_upper(mw, phi, dn_trials);
    LevelEstimates L;
    L.d_omega = dw.value;
    L.d_n_upper = dn.value;
    L.d = std::min(L.d_omega, L.d_n_upper);
    L.trial_count = dw.trial_count + static_cast<int>(dn.points.size());
    return L;
}

// ---------------------------------------------------------------------------
// Dichotomy

struct DichotomyConfig {
    double dt = 1e-3;
    double t_end = 2.0;
    std::vector<double> sample_times{0.5, 1.0, 2.0};
    double blowup_gradient_factor = 1e3;
    double band = 1e-9;
    /// Samples whose action drifted from S(u0) by more than this (relative) are not classified.
    double resolution_tol = 1e-4;
};

struct DichotomyRecord {
    SetLabel label0 = SetLabel::outside;
    double S0 = 0.0;
    std::vector<double> sample_t;
    std::vector<SetLabel> labels;
    /// Samples skipped because the discrete flow no longer conserved the action there.
    int unresolved_samples = 0;
    std::optional<double> blowup_time;
    double max_grad_ratio = 0.0;
    /// Largest ||u||^2_{H_omega} over the samples and the bound 2d(p+1)/(p-1) for R_plus.
    double max_h_norm = 0.0;
    double h_norm_bound = 0.0;
    bool consistent = false;
    std::string detail;
};

inline DichotomyRecord dichotomy_run(const RadialField& u0, const ModelParams& params, double d, const DichotomyConfig& cfg = {})
{
    const ModelParams m = params.with_omega(params.omega_value());
    DichotomyRecord rec;
    rec.S0 = action_S(u0, m);
    rec.label0 = classify_set(u0, m, d, cfg.band);
    if (rec.label0 == SetLabel::outside) throw SolverError("outside hypothesis", "S_omega(u0) >= d");
    rec.h_norm_bound = 2.0 * d * (m.p + 1.0) / (m.p - 1.0);

    EvolveConfig ec;
    ec.dt = cfg.dt;
    ec.t_end = cfg.t_end;
    ec.blowup_gradient_factor = cfg.blowup_gradient_factor;
    ec.snapshot_times = cfg.sample_times;
    ec.record_every = std::max(1, static_cast<int>(std::lround(0.01 / cfg.dt)));
    const EvolveResult r = evolve(u0, m, ec);
    rec.blowup_time = r.blowup_time;
    if (!rec.blowup_time && r.aborted_nan) rec.blowup_time = r.t_final;
    const auto& G = r.series.grad_sq;
    rec.max_grad_ratio = *std::max_element(G.begin(), G.end()) / G.front();
    rec.max_h_norm = h_omega_norm_sq(u0, m);

    bool labels_ok = true;
    for (const Snapshot& s : r.snapshots) {
        if (std::abs(action_S(s.u, m) - rec.S0) > cfg.resolution_tol * std::max(1.0, std::abs(rec.S0))) {
            ++rec.unresolved_samples;
            continue;
        }
        SetLabel l;
        try {
            l = classify_set(s.u, m, d, cfg.band);
        } catch (const AmbiguousLabel&) {
            labels_ok = false;
            rec.detail = "label ambiguous at t = " + std::to_string(s.t);
            continue;
        }
        rec.sample_t.push_back(s.t);
        rec.labels.push_back(l);
        rec.max_h_norm = std::max(rec.max_h_norm, h_omega_norm_sq(s.u, m));
        if (l != rec.label0) {
            labels_ok = false;
            rec.detail = std::string("label changed to ") + to_string(l) + " at t = " + std::to_string(s.t);
        }
    }
    if (rec.labels.empty()) {
        labels_ok = false;
        rec.detail = "no resolved sample after t = 0";
    }
    const bool blew = rec.blowup_time.has_value();
    switch (rec.label0) {
    case SetLabel::K_minus:
        rec.consistent = blew && labels_ok;
        if (!blew) rec.detail = "K_minus datum did not blow up";
        break;
    case SetLabel::R_plus:
        rec.consistent = !blew && labels_ok && rec.max_h_norm < rec.h_norm_bound;
        if (blew) rec.detail = "R_plus datum blew up";
        else if (!(rec.max_h_norm < rec.h_norm_bound)) rec.detail = "H_omega norm exceeded 2d(p+1)/(p-1)";
        break;
    default:
        rec.consistent = !blew && labels_ok;
        if (blew) rec.detail = "bounded-class datum blew up";
        break;
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Stability and instability

/// min over theta of ||u - e^{i theta} phi||_Sigma.
inline double phase_aligned_sigma_distance(const RadialField& u, const RadialField& phi)
{
    const double d2 = sigma_norm_sq(u) + sigma_norm_sq(phi) - 2.0 * std::abs(sigma_inner(u, phi));
    return std::sqrt(std::max(d2, 0.0));
}

struct StabilityConfig {
    double h = 2e-3;
    double rmax = 8.0;
    double dt = 1e-3;
    double t_end = 20.0;
    double sample_every = 0.1;
    std::uint64_t seed = 7;
};

struct StabilityResult {
    double sup_distance = 0.0;
    std::vector<double> t, distance;
    double omega = 0.0;
    double ground_mass = 0.0;
};

/// Smooth complex perturbation with ||eta||_Sigma = 1.
inline RadialField random_smooth_perturbation(GridPtr g, std::uint64_t seed, double gamma)
{
    std::mt19937_64 rng(seed);
    const RadialField re = detail::gaussian_mixture(g, rng, gamma);
    const RadialField im = detail::gaussian_mixture(g, rng, gamma);
    const RadialField eta = re + im.scaled(cplx(0.0, 1.0));
    return eta.scaled(1.0 / std::sqrt(sigma_norm_sq(eta)));
}

inline StabilityResult stability_run(const ModelParams& m, double q, double eps, const StabilityConfig& cfg = {})
{
    if (m.criticality == Criticality::supercritical) throw ParamError("stability run needs subcritical or critical p");
    const GridPtr g = make_grid(m.dim, cfg.h, cfg.rmax);
    const GroundStateResult gs = normalized_gradient_flow(q, m, g);
    const RadialField& phi = gs.profile;
    RadialField u0 = phi;
    if (eps != 0.0) u0 = phi + random_smooth_perturbation(g, cfg.seed, m.gamma).scaled(eps);

    EvolveConfig ec;
    ec.dt = cfg.dt;
    ec.t_end = cfg.t_end;
    ec.record_every = 1000000;
    for (double t = cfg.sample_every; t < cfg.t_end + 1e-12; t += cfg.sample_every) ec.snapshot_times.push_back(std::min(t, cfg.t_end));
    const EvolveResult r = evolve(u0, m, ec);

    StabilityResult out;
    out.omega = gs.omega;
    out.ground_mass = gs.mass;
    out.t.push_back(0.0);
    out.distance.push_back(phase_aligned_sigma_distance(u0, phi));
    for (const Snapshot& s : r.snapshots) {
        out.t.push_back(s.t);
        out.distance.push_back(phase_aligned_sigma_distance(s.u, phi));
    }
    if (r.blowup_time || r.aborted_nan) out.distance.push_back(std::numeric_limits<double>::infinity());
    out.sup_distance = *std::max_element(out.distance.begin(), out.distance.end());
    return out;
}

struct InstabilityResult {
    double lambda = 0.0;
    SetLabel label = SetLabel::outside;
    std::optional<double> blowup_time;
    double max_grad_ratio = 0.0;
};

/// Evolve lambda * phi_omega at the critical power and report blow-up detection.
inline InstabilityResult instability_run(const ModelParams& params, double lambda, double h = 2e-3, double rmax = 8.0, double dt = 1e-4,
                                         double t_end = 2.0)
{
    if (!params.critical()) throw ParamError("instability run applies at the critical power");
    const ModelParams m = params.with_omega(params.omega_value());
    const GridPtr g = make_grid(m.dim, h, rmax);
    const RadialField phi = shoot_phi(m, g).profile;
    const RadialField u0 = phi.scaled(lambda);
    InstabilityResult out;
    out.lambda = lambda;
    const FunctionalReport rep = report(u0, m);
    out.label = rep.K_omega < 0.0 ? (rep.I < 0.0 ? SetLabel::K_minus : SetLabel::K_plus) : SetLabel::R_plus;
    EvolveConfig ec;
    ec.dt = dt;
    ec.t_end = t_end;
    ec.record_every = std::max(1, static_cast<int>(std::lround(0.01 / dt)));
    const EvolveResult r = evolve(u0, m, ec);
    out.blowup_time = r.blowup_time;
    if (!out.blowup_time && r.aborted_nan) out.blowup_time = r.t_final;
    const auto& G = r.series.grad_sq;
    out.max_grad_ratio = *std::max_element(G.begin(), G.end()) / G.front();
    return out;
}

// ---------------------------------------------------------------------------
// Lens equivalence

struct LensConfig {
    double h = 2e-3;
    /// Trapped run domain.
    double rmax = 8.0;
    /// The free run spreads by the factor 1/cos(2 gamma t) and needs a wider domain.
    double free_rmax = 30.0;
    double dt = 1e-3;
    int samples = 10;
    double amplitude = 1.0;
    /// Fraction of pi/(4 gamma) covered by the comparison.
    double horizon_fraction = 0.8;
};

struct LensReport {
    std::vector<double> t, s, rel_l2, mass_lens, mass_direct;
    double worst = 0.0;
    /// Snapshots of the free run at the matched times s, kept for round trips.
    std::vector<Snapshot> free_snapshots;
};

/**
 * Evolve amplitude * r^2 exp(-r^2/2) under the free and the trapped equation,
 * map the free run forward at t_k and compare with the trapped run in relative L^2.
 */
inline LensReport lens_equivalence(const ModelParams& m, const LensConfig& cfg = {})
{
    if (cfg.samples < 1) throw ParamError("lens comparison needs at least one sample time");
    const double gm = m.gamma;
    const GridPtr gf = make_grid(m.dim, cfg.h, cfg.free_rmax), gt = make_grid(m.dim, cfg.h, cfg.rmax);
    const double a = cfg.amplitude;
    auto datum = [a](double r) { return a * r * r * std::exp(-0.5 * r * r); };
    const double tmax = cfg.horizon_fraction * std::numbers::pi / (4.0 * gm);
    LensReport rep;
    for (int k = 0; k <= cfg.samples; ++k) {
        rep.t.push_back(tmax * k / cfg.samples);
        rep.s.push_back(std::tan(2.0 * gm * rep.t.back()) / (2.0 * gm));
    }
    EvolveConfig cf;
    cf.dt = cfg.dt;
    cf.t_end = rep.s.back() + 1e-9;
    cf.free_equation = true;
    cf.snapshot_times = rep.s;
    cf.record_every = 1000000;
    EvolveConfig ct = cf;
    ct.free_equation = false;
    ct.t_end = tmax + 1e-9;
    ct.snapshot_times = rep.t;
    EvolveResult F, T;
    parallel_for(2, 2, [&](std::size_t k) {
        if (k == 0) F = evolve(RadialField::sample(gf, datum), m, cf);
        else T = evolve(RadialField::sample(gt, datum), m, ct);
    });
    if (F.snapshots.size() != rep.s.size() || T.snapshots.size() != rep.t.size())
        throw SolverError("incomplete run", "a lens run stopped before the last sample time");
    rep.free_snapshots = F.snapshots;
    const TrajectorySampler free_traj(F.snapshots);
    for (std::size_t k = 0; k < rep.t.size(); ++k) {
        const RadialField L = lens_forward(free_traj, rep.t[k], m, gt);
        const RadialField& D = T.snapshots[k].u;
        rep.rel_l2.push_back(std::sqrt(mass(L - D) / mass(D)));
        rep.mass_lens.push_back(mass(L));
        rep.mass_direct.push_back(mass(D));
        rep.worst = std::max(rep.worst, rep.rel_l2.back());
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Lagrange multiplier asymptotics

struct MultiplierSample {
    double q = 0.0;
    double omega = 0.0;
    double energy = 0.0;
};

/// Multiplier of the mass-constrained minimizer on the ball of radius r for each q.
inline std::vector<MultiplierSample> multiplier_asymptotics(const ModelParams& m, const std::vector<double>& qs, double ball_radius,
                                                            double h = 2e-3, double rmax = 8.0)
{
    const GridPtr g = make_grid(m.dim, h, rmax);
    std::vector<MultiplierSample> out;
    for (double q : qs) {
        FlowOptions fo;
        fo.ball_radius = ball_radius;
        const GroundStateResult r = normalized_gradient_flow(q, m, g, fo);
        out.push_back({q, r.omega, r.energy});
    }
    return out;
}

} // namespace igp
