#pragma once

#include "core.hpp"
#include "evolve.hpp"
#include "exact.hpp"
#include "experiments.hpp"
#include "functionals.hpp"
#include "groundstate.hpp"
#include "interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace igp::acceptance {

/// Tolerances and run parameters of the acceptance suite. They are pinned
/// for the default model N=3, b=0.5, gamma=1.
namespace tol {
inline constexpr double q_residual_sup = 1e-8;
inline constexpr double q_pohozaev_rel = 1e-6;
inline constexpr int weinstein_trials = 100;
inline constexpr double stationary_rel = 1e-6;
inline constexpr double rayleigh_rel = 1e-4;
inline constexpr double uncertainty_rel = 1e-6;
inline constexpr double mass_drift_per_time = 1e-10;
inline constexpr double energy_drift = 1e-6;
inline constexpr double energy_ratio_lo = 3.0, energy_ratio_hi = 5.0;
inline constexpr double virial_rel = 1e-5;
inline constexpr double virial_general_rel = 1e-4;
inline constexpr double virial_general_ratio = 3.0;
inline constexpr double sweep_bounded_ratio = 3.0;
inline constexpr double sweep_time_factor = 1.1;
inline constexpr double lens_rel = 1e-4;
inline constexpr double lens_identity = 1e-10;
inline constexpr double lens_interpolated = 1e-6;
inline constexpr double residual_ratio_lo = 3.5, residual_ratio_hi = 4.5;
inline constexpr double closed_form_mass_rel = 1e-6;
inline constexpr double periodicity_rel = 1e-8;
inline constexpr double level_agreement = 0.01;
inline constexpr double cross_constrained_I = 1e-8;
inline constexpr double root_rel = 1e-12;
inline constexpr double stability_factor = 5.0;
inline constexpr double standing_wave_drift = 1e-4;
} // namespace tol

struct Setup {
    int dim = 3;
    double b = 0.5;
    double gamma = 1.0;
    double h = 2e-3;
    double rmax = 8.0;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    double p_critical() const { return critical_power(dim, b); }
    /// Supercritical power used by the level and dichotomy checks.
    double p_super() const { return p_critical() + 0.5; }
    double p_sub() const { return p_critical() - 0.5; }

    ModelParams model(double p, std::optional<double> omega = std::nullopt) const
    {
        return validate_params(RawParams{dim, b, p, gamma, omega, 1.0});
    }
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

class Detail {
public:
    template <class T>
    Detail& kv(const char* k, T v)
    {
        if (!first_) os_ << ' ';
        first_ = false;
        os_ << k << '=' << v;
        return *this;
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
    bool first_ = true;
};

inline std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

inline bool positive_monotone(const RadialField& u)
{
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i].real() > 0.0) || u[i].imag() != 0.0) return false;
        if (i > 0 && u[i].real() > u[i - 1].real()) return false;
    }
    return true;
}

inline double max_abs(const RadialField& u)
{
    double s = 0.0;
    for (const auto& z : u.values()) s = std::max(s, std::abs(z));
    return s;
}

inline double rel_l2(const RadialField& a, const RadialField& ref) { return std::sqrt(mass(a - ref) / mass(ref)); }

} // namespace detail

// 1. Ground state Q.
inline CriterionResult check_ground_state_Q(const Setup& s)
{
    CriterionResult c{1, "ground state Q", false, ""};
    const ModelParams m = s.model(s.p_critical());
    const GridPtr g = make_grid(s.dim, s.h, 30.0);
    const GroundStateResult q = shoot_Q(m, g);
    const double G = grad_norm_sq(q.profile), P = potential_P(q.profile, m);
    const double poh = std::abs((s.dim + 2.0 - s.b) / s.dim * G - P) / P;
    const double JQ = weinstein_J(q.profile, m);

    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> size(0.02, 0.3);
    int violations = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < tol::weinstein_trials; ++k) {
        RadialField trial;
        const RadialField bump = igp::detail::gaussian_mixture(g, rng, 1.0);
        if (k % 2 == 0) trial = bump;
        else trial = q.profile + bump.scaled(size(rng) * std::sqrt(q.mass / mass(bump)));
        const double gap = weinstein_J(trial, m) - JQ;
        min_gap = std::min(min_gap, gap / JQ);
        if (gap < 0.0) ++violations;
    }
    c.pass = q.residual_sup < tol::q_residual_sup && poh < tol::q_pohozaev_rel && violations == 0;
    c.detail = detail::Detail()
                   .kv("residual", detail::sci(q.residual_sup))
                   .kv("pohozaev_rel", detail::sci(poh))
                   .kv("trials", tol::weinstein_trials)
                   .kv("J_violations", violations)
                   .kv("min_rel_gap", detail::sci(min_gap))
                   .str();
    return c;
}

// 2. Stationary phi_omega at the critical and a supercritical power.
inline CriterionResult check_stationary_phi(const Setup& s)
{
    CriterionResult c{2, "stationary phi_omega", true, ""};
    const GridPtr g = make_grid(s.dim, s.h, s.rmax);
    double worst_K = 0.0, worst_I = 0.0;
    bool shape = true;
    for (double p : {s.p_critical(), s.p_super()}) {
        const ModelParams m = s.model(p, 0.0);
        const GroundStateResult r = shoot_phi(m, g);
        const FunctionalReport rep = report(r.profile, m);
        worst_K = std::max(worst_K, std::abs(rep.K_omega) / rep.h_omega_norm_sq);
        worst_I = std::max(worst_I, std::abs(rep.I) / rep.h_omega_norm_sq);
        shape = shape && detail::positive_monotone(r.profile);
    }
    c.pass = worst_K < tol::stationary_rel && worst_I < tol::stationary_rel && shape;
    c.detail = detail::Detail()
                   .kv("max_K_rel", detail::sci(worst_K))
                   .kv("max_I_rel", detail::sci(worst_I))
                   .kv("positive_monotone", shape ? "yes" : "no")
                   .str();
    return c;
}

// 3. Oscillator ground state.
inline CriterionResult check_oscillator(const Setup& s)
{
    CriterionResult c{3, "oscillator spectrum", false, ""};
    const ModelParams m = s.model(s.p_critical());
    const RadialField phi = phi_gaussian(make_grid(s.dim, s.h, s.rmax), m);
    const double M = mass(phi), G = grad_norm_sq(phi), V = variance(phi);
    const double rq = (G + s.gamma * s.gamma * V) / M;
    const double rq_err = std::abs(rq - s.gamma * s.dim) / (s.gamma * s.dim);
    const double hi_err = std::abs(M - 2.0 / s.dim * std::sqrt(G * V)) / M;
    c.pass = rq_err < tol::rayleigh_rel && hi_err < tol::uncertainty_rel;
    c.detail = detail::Detail().kv("rayleigh_rel", detail::sci(rq_err)).kv("uncertainty_rel", detail::sci(hi_err)).str();
    return c;
}

namespace detail {

inline RadialField bounded_datum(GridPtr g) { return RadialField::sample(std::move(g), [](double r) { return 0.2 * std::exp(-r * r / 3.0); }); }

} // namespace detail

// 4. Conservation of mass and energy.
inline CriterionResult check_conservation(const Setup& s)
{
    CriterionResult c{4, "conservation", false, ""};
    const ModelParams m = s.model(s.p_critical());
    const GridPtr g = make_grid(s.dim, s.h, s.rmax);
    const double T = 10.0;
    double dm[2] = {0.0, 0.0}, de[2] = {0.0, 0.0};
    const double dts[2] = {1e-3, 5e-4};
    for (int k = 0; k < 2; ++k) {
        EvolveConfig ec;
        ec.dt = dts[k];
        ec.t_end = T;
        ec.record_every = static_cast<int>(std::lround(0.01 / dts[k]));
        const EvolveResult r = evolve(detail::bounded_datum(g), m, ec);
        const auto& S = r.series;
        for (std::size_t i = 0; i < S.size(); ++i) {
            dm[k] = std::max(dm[k], std::abs(S.mass[i] - S.mass[0]) / S.mass[0]);
            de[k] = std::max(de[k], std::abs(S.energy[i] - S.energy[0]));
        }
    }
    const double ratio = de[0] / de[1];
    const double dm_rate = std::max(dm[0], dm[1]) / T;
    c.pass = dm_rate < tol::mass_drift_per_time && de[0] < tol::energy_drift && ratio > tol::energy_ratio_lo &&
             ratio < tol::energy_ratio_hi;
    c.detail = detail::Detail()
                   .kv("mass_drift_per_time", detail::sci(dm_rate))
                   .kv("energy_drift", detail::sci(de[0]))
                   .kv("energy_ratio_dt_half", detail::sci(ratio))
                   .str();
    return c;
}

// 5. Virial law.
inline CriterionResult check_virial(const Setup& s)
{
    CriterionResult c{5, "virial law", false, ""};
    const ModelParams m = s.model(s.p_critical());

    // bounded run over half a trap period
    EvolveConfig eb;
    eb.dt = 1e-3;
    eb.t_end = std::numbers::pi / (2.0 * s.gamma);
    eb.record_every = 10;
    const EvolveResult rb = evolve(detail::bounded_datum(make_grid(s.dim, s.h, s.rmax)), m, eb);
    const VirialCheck vb = virial_check(rb.series, m);
    const double bounded = vb.max_deviation / vb.max_abs_f;

    // collapsing run up to 0.8 of the predicted collapse time
    const GridPtr gc = make_grid(s.dim, 4e-3, 16.0);
    const RadialField u0 = threshold_datum(m, 1.05, 2.0, gc);
    const auto tau = predict_collapse_time(u0, m);
    double collapsing = std::numeric_limits<double>::infinity();
    if (tau) {
        EvolveConfig ec;
        ec.dt = 2.5e-5;
        ec.t_end = 0.8 * *tau;
        const EvolveResult rc = evolve(u0, m, ec);
        const VirialCheck vc = virial_check(rc.series, m);
        collapsing = vc.max_deviation / vc.max_abs_f;
    }

    // full identity at a supercritical power, second order in dt
    const ModelParams ms = s.model(s.p_super());
    const GridPtr gs = make_grid(s.dim, s.h, 16.0);
    const RadialField v0 = RadialField::sample(gs, [](double r) { return 0.5 * std::exp(-0.5 * r * r); });
    double dev[2] = {0.0, 0.0};
    double scale = 0.0;
    const double dts[2] = {2e-3, 1e-3};
    for (int k = 0; k < 2; ++k) {
        EvolveConfig ec;
        ec.dt = dts[k];
        ec.t_end = 1.0;
        const EvolveResult r = evolve(v0, ms, ec);
        const VirialCheck v = virial_check(r.series, ms);
        dev[k] = v.max_deviation;
        scale = v.max_abs_f;
    }
    const double general_ratio = dev[0] / dev[1];
    const double general = dev[1] / scale;

    c.pass = bounded < tol::virial_rel && collapsing < tol::virial_rel && general < tol::virial_general_rel &&
             general_ratio > tol::virial_general_ratio;
    c.detail = detail::Detail()
                   .kv("bounded_rel", detail::sci(bounded))
                   .kv("collapse_rel", detail::sci(collapsing))
                   .kv("tau", tau ? detail::sci(*tau) : "none")
                   .kv("general_rel", detail::sci(general))
                   .kv("general_dt_ratio", detail::sci(general_ratio))
                   .str();
    return c;
}

// 6. Sharp threshold sweep.
inline CriterionResult check_threshold(const Setup& s)
{
    CriterionResult c{6, "sharp threshold", true, ""};
    const ModelParams m = s.model(s.p_critical());
    SweepConfig cfg;
    cfg.h = s.h;
    cfg.rmax = s.rmax;
    cfg.workers = s.workers;
    const SweepResult r = threshold_sweep(m, {0.80, 0.90, 0.95, 1.00, 1.05, 1.10}, {2.0}, cfg);
    std::ostringstream os;
    for (const SweepRow& row : r.rows) {
        bool ok = row.error.empty();
        if (row.c < 1.0) {
            ok = ok && row.outcome == SweepOutcome::global_bounded && row.max_grad_ratio <= tol::sweep_bounded_ratio;
            os << "c=" << row.c << ":" << (ok ? "bounded" : "FAIL") << "(ratio " << detail::sci(row.max_grad_ratio) << ") ";
        } else {
            ok = ok && row.outcome == SweepOutcome::blowup && row.t_pred && row.t_blow &&
                 *row.t_blow <= tol::sweep_time_factor * *row.t_pred && row.criterion_holds;
            os << "c=" << row.c << ":" << (ok ? "blowup" : "FAIL") << "(t " << (row.t_blow ? detail::sci(*row.t_blow) : "-")
               << " <= 1.1*" << (row.t_pred ? detail::sci(*row.t_pred) : "-") << ") ";
        }
        if (!row.error.empty()) os << "[" << row.error << "] ";
        c.pass = c.pass && ok;
    }
    c.detail = os.str();
    if (!c.detail.empty()) c.detail.pop_back();
    return c;
}

// 7. Lens equivalence.
inline CriterionResult check_lens(const Setup& s)
{
    CriterionResult c{7, "lens equivalence", false, ""};
    const ModelParams m = s.model(s.p_critical(), 0.0);
    const double gm = s.gamma;
    LensConfig lc;
    lc.h = s.h;
    lc.rmax = s.rmax;
    const LensReport rep = lens_equivalence(m, lc);
    const GridPtr gt = make_grid(s.dim, s.h, s.rmax);
    const TrajectorySampler free_traj(rep.free_snapshots);

    // algebraic round trip with a pointwise sampler
    auto analytic = [](double r, double t) { return std::exp(-0.5 * r * r) * std::polar(1.0 + t, 0.3 * r * r - t); };
    auto forward = [&](double r, double t) {
        const double cs = std::cos(2.0 * gm * t), tn = std::tan(2.0 * gm * t);
        return std::pow(cs, -0.5 * s.dim) * std::polar(1.0, -0.5 * gm * r * r * tn) * analytic(r / cs, tn / (2.0 * gm));
    };
    double identity = 0.0, interpolated = 0.0;
    for (std::size_t k = 0; k < rep.t.size(); ++k) {
        const double sk = rep.s[k];
        const RadialField back = lens_inverse(forward, sk, m, gt);
        const RadialField ref = RadialField::sample(gt, [&](double r) { return analytic(r, sk); });
        identity = std::max(identity, detail::max_abs(back - ref) / detail::max_abs(ref));

        // round trip through stored numeric snapshots, where cubic interpolation enters
        const RadialField fwd = lens_forward(free_traj, rep.t[k], m, gt);
        const TrajectorySampler trapped({Snapshot{rep.t[k], fwd}});
        const RadialField round = lens_inverse(trapped, sk, m, gt);
        const double sq = std::sqrt(1.0 + 4.0 * gm * gm * sk * sk);
        double e = 0.0, nrm = 0.0;
        for (std::size_t i = 0; i < gt->size(); ++i) {
            if (gt->r(i) * sq > gt->rmax() - 4.0 * gt->h()) break;
            const cplx direct = free_traj(gt->r(i), sk);
            e += gt->weight(i) * std::norm(round[i] - direct);
            nrm += gt->weight(i) * std::norm(direct);
        }
        interpolated = std::max(interpolated, std::sqrt(e / nrm));
    }
    c.pass = rep.worst < tol::lens_rel && identity < tol::lens_identity && interpolated < tol::lens_interpolated;
    c.detail = detail::Detail()
                   .kv("forward_rel_l2", detail::sci(rep.worst))
                   .kv("round_trip_exact", detail::sci(identity))
                   .kv("round_trip_interpolated", detail::sci(interpolated))
                   .str();
    return c;
}

// 8. Minimal-mass blow-up solution.
inline CriterionResult check_minimal_mass(const Setup& s)
{
    CriterionResult c{8, "minimal-mass blow-up", true, ""};
    const ModelParams m = s.model(s.p_critical(), 0.0);
    const BlowupFamilyParams fp = BlowupFamilyParams::trapped(3.0, 0.3, 0.5, s.gamma);
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (double t : {0.0, 0.2, 0.4}) {
        const double kappa = minimal_mass_scale(fp, t, s.gamma);
        double prev = 0.0;
        for (double h : {4e-3, 2e-3, 1e-3}) {
            const GridPtr g = make_grid(s.dim, h, s.rmax);
            const RadialField Qd = aligned_profile(m, kappa, *g);
            const double dn = std::sqrt(dual_norm_sq(minimal_mass_residual(fp, t, m, Qd, g)));
            if (prev > 0.0) {
                rmin = std::min(rmin, prev / dn);
                rmax = std::max(rmax, prev / dn);
            }
            prev = dn;
        }
    }

    const double qh = 1e-3;
    const GroundStateResult q = shoot_Q(m, make_grid(s.dim, qh, 30.0));
    const RadialInterpolant Q(q.profile);
    double mass_err = 0.0, period_err = 0.0;
    for (double t : {0.0, 0.1, 0.2, 0.3, 0.4}) {
        const double kappa = minimal_mass_scale(fp, t, s.gamma);
        const GridPtr g = make_grid(s.dim, qh / kappa, s.rmax);
        const RadialField u = minimal_mass_solution(fp, t, m, Q, g);
        mass_err = std::max(mass_err, std::abs(mass(u) - q.mass) / q.mass);
        const RadialField w = minimal_mass_solution(fp, t + std::numbers::pi / (2.0 * s.gamma), m, Q, g);
        period_err = std::max(period_err, detail::max_abs(w - u) / detail::max_abs(u));
    }
    c.pass = rmin >= tol::residual_ratio_lo && rmax <= tol::residual_ratio_hi && mass_err < tol::closed_form_mass_rel &&
             period_err < tol::periodicity_rel;
    c.detail = detail::Detail()
                   .kv("residual_ratio_min", detail::sci(rmin))
                   .kv("residual_ratio_max", detail::sci(rmax))
                   .kv("mass_rel", detail::sci(mass_err))
                   .kv("periodicity_rel", detail::sci(period_err))
                   .str();
    return c;
}

// 9. Variational levels and the flow invariance of the sets.
inline CriterionResult check_levels(const Setup& s)
{
    CriterionResult c{9, "variational levels", false, ""};
    const ModelParams m = s.model(s.p_super(), 0.0);
    LevelOptions lo;
    lo.h = s.h;
    lo.rmax = s.rmax;
    lo.seed = s.seed;
    lo.workers = s.workers;
    const DOmegaEstimate dw = estimate_d_omega(m, lo);
    const double agree = std::abs(dw.seeded - dw.random_restart) / std::min(dw.seeded, dw.random_restart);

    const GridPtr g = make_grid(s.dim, s.h, s.rmax);
    const RadialField phi = shoot_phi(m, g).profile;
    const int dn_trials = 16;
    const DnEstimate dn = estimate_d_n_upper(m, phi, dn_trials);
    bool points_ok = static_cast<int>(dn.points.size()) == dn_trials;
    for (const auto& pt : dn.points) points_ok = points_ok && pt.K < 0.0 && std::abs(pt.I) < tol::cross_constrained_I * pt.grad_sq;
    const double d = std::min(dw.value, dn.value);

    std::vector<double> lambdas;
    for (double l : {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98}) lambdas.push_back(l);
    for (double l : {1.05, 1.1, 1.15, 1.2, 1.25, 1.3, 1.35, 1.4, 1.45, 1.5}) lambdas.push_back(l);
    std::vector<DichotomyRecord> recs(lambdas.size());
    std::vector<std::string> errs(lambdas.size());
    parallel_for(lambdas.size(), s.workers, [&](std::size_t k) {
        DichotomyConfig dc;
        if (lambdas[k] > 1.0) {
            dc.dt = 1e-4;
            dc.t_end = 1.0;
            dc.sample_times.clear();
            for (int j = 1; j <= 200; ++j) dc.sample_times.push_back(0.005 * j);
        }
        try {
            recs[k] = dichotomy_run(phi.scaled(lambdas[k]), m, d, dc);
        } catch (const std::exception& e) {
            errs[k] = e.what();
        }
    });
    int consistent = 0, samples = 0;
    std::string first_failure;
    for (std::size_t k = 0; k < recs.size(); ++k) {
        if (errs[k].empty() && recs[k].consistent) ++consistent;
        else if (first_failure.empty())
            first_failure = "lambda=" + detail::sci(lambdas[k]) + ": " + (errs[k].empty() ? recs[k].detail : errs[k]);
        samples += static_cast<int>(recs[k].labels.size());
    }

    c.pass = dw.value > 0.0 && agree < tol::level_agreement && points_ok && consistent == static_cast<int>(lambdas.size());
    c.detail = detail::Detail()
                   .kv("d_omega", detail::sci(dw.value))
                   .kv("search_gap", detail::sci(agree))
                   .kv("d_n_upper", detail::sci(dn.value))
                   .kv("cross_points_ok", std::to_string(dn.points.size()) + "/" + std::to_string(dn_trials))
                   .kv("dichotomy_consistent", std::to_string(consistent) + "/" + std::to_string(lambdas.size()))
                   .kv("labelled_samples", samples)
                   .str();
    if (!first_failure.empty()) c.detail += " first_failure=" + first_failure;
    return c;
}

// 10. Lagrange multiplier asymptotics on a small ball.
inline CriterionResult check_multipliers(const Setup& s)
{
    CriterionResult c{10, "multiplier asymptotics", false, ""};
    const ModelParams m = s.model(s.p_super());
    const auto v = multiplier_asymptotics(m, {1e-1, 1e-2, 1e-3}, 1.0, s.h, s.rmax);
    const double floor = -s.gamma * s.dim;
    bool ok = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        ok = ok && v[i].omega > floor;
        if (i > 0) ok = ok && v[i].omega < v[i - 1].omega;
        os << "q=" << v[i].q << ":omega+gammaN=" << detail::sci(v[i].omega - floor) << ' ';
    }
    c.pass = ok;
    c.detail = os.str();
    c.detail.pop_back();
    return c;
}

// 11. Uniqueness coefficients over the sampled admissible grid.
inline CriterionResult check_uniqueness(const Setup&)
{
    CriterionResult c{11, "uniqueness coefficients", true, ""};
    int cases = 0, bad_sign = 0, bad_changes = 0;
    double worst_root = 0.0;
    for (int N : {3, 4, 5})
        for (double b : {0.25, 0.5, 0.75}) {
            const double pu = upper_power(N, b);
            for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
                const double p = 1.0 + frac * (pu - 1.0);
                for (double w : {-0.5 * N, 0.0, 1.0, 5.0}) {
                    const UniquenessReport u = uniqueness_monitor(N, b, p, w);
                    ++cases;
                    if (!(u.A < 0.0 && u.C >= 0.0)) ++bad_sign;
                    if (u.sign_changes != 1) ++bad_changes;
                    if (w == 0.0) worst_root = std::max(worst_root, std::abs(u.k - std::sqrt(-u.C / u.A)) / std::sqrt(-u.C / u.A));
                }
            }
        }
    c.pass = bad_sign == 0 && bad_changes == 0 && worst_root < tol::root_rel;
    c.detail = detail::Detail()
                   .kv("cases", cases)
                   .kv("sign_failures", bad_sign)
                   .kv("sign_change_failures", bad_changes)
                   .kv("root_rel", detail::sci(worst_root))
                   .str();
    return c;
}

// 12. Stability of the subcritical minimizer and instability of the critical standing wave.
inline CriterionResult check_stability(const Setup& s)
{
    CriterionResult c{12, "stability and instability", false, ""};
    const ModelParams ms = s.model(s.p_sub());
    StabilityConfig sc;
    sc.h = s.h;
    sc.rmax = s.rmax;
    sc.seed = s.seed + 6;
    const double eps = 1e-2;
    const StabilityResult pert = stability_run(ms, 5.0, eps, sc);
    const StabilityResult still = stability_run(ms, 5.0, 0.0, sc);

    const ModelParams mc = s.model(s.p_critical(), 5.0);
    const InstabilityResult ins = instability_run(mc, 1.05, s.h, s.rmax);
    c.pass = pert.sup_distance <= tol::stability_factor * eps && still.sup_distance <= tol::standing_wave_drift &&
             ins.label == SetLabel::K_minus && ins.blowup_time.has_value();
    c.detail = detail::Detail()
                   .kv("perturbed_sup", detail::sci(pert.sup_distance))
                   .kv("bound", detail::sci(tol::stability_factor * eps))
                   .kv("unperturbed_sup", detail::sci(still.sup_distance))
                   .kv("bump_label", to_string(ins.label))
                   .kv("bump_blowup", ins.blowup_time ? detail::sci(*ins.blowup_time) : "none")
                   .str();
    return c;
}

using Check = std::function<CriterionResult(const Setup&)>;

inline std::vector<Check> all_checks()
{
    return {check_ground_state_Q, check_stationary_phi, check_oscillator, check_conservation, check_virial, check_threshold,
            check_lens,           check_minimal_mass,   check_levels,     check_multipliers,  check_uniqueness, check_stability};
}

inline std::string format_line(const CriterionResult& r)
{
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << "  [" << (r.id < 10 ? " " : "") << r.id << "] " << r.name << ": " << r.detail;
    return os.str();
}

/// Run the checks (all when `only` is empty), printing one line per criterion as it completes.
inline std::vector<CriterionResult> run(const Setup& s, std::ostream& os, const std::vector<int>& only = {})
{
    std::vector<CriterionResult> out;
    const auto checks = all_checks();
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        CriterionResult r;
        try {
            r = checks[i](s);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = "criterion " + std::to_string(id);
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        os << format_line(r) << std::endl;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace igp::acceptance
