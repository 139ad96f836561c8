#pragma once

#include "core.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace igp {

/// Sum of w r^{-b} |u|^{p+1}.
inline double potential_P(const RadialField& u, const ModelParams& m)
{
    const auto& g = u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += g.weight(i) * std::pow(g.r(i), -m.b) * std::pow(std::abs(u[i]), m.p + 1.0);
    return s;
}

inline double energy(const RadialField& u, const ModelParams& m)
{
    const double g2 = m.gamma * m.gamma;
    return 0.5 * grad_norm_sq(u) + 0.5 * g2 * variance(u) - m.coupling * potential_P(u, m) / (m.p + 1.0);
}

/// ||u||^2_{H_omega} = ||grad u||^2 + gamma^2 ||x u||^2 + omega ||u||^2.
inline double h_omega_norm_sq(const RadialField& u, const ModelParams& m)
{
    return grad_norm_sq(u) + m.gamma * m.gamma * variance(u) + m.omega_value() * mass(u);
}

/// Coefficient of P in the virial functional I.
inline double virial_coefficient(const ModelParams& m)
{
    return (m.dim * (m.p - 1.0) + 2.0 * m.b) / (2.0 * (m.p + 1.0));
}

inline double action_S(const RadialField& u, const ModelParams& m)
{
    return 0.5 * h_omega_norm_sq(u, m) - m.coupling * potential_P(u, m) / (m.p + 1.0);
}

inline double nehari_K(const RadialField& u, const ModelParams& m)
{
    return h_omega_norm_sq(u, m) - m.coupling * potential_P(u, m);
}

inline double virial_I(const RadialField& u, const ModelParams& m)
{
    return grad_norm_sq(u) - m.gamma * m.gamma * variance(u) - virial_coefficient(m) * m.coupling * potential_P(u, m);
}

inline double weinstein_J(const RadialField& u, const ModelParams& m)
{
    if (!m.critical()) throw ParamError("Weinstein functional is defined only at the critical power");
    const double M = mass(u);
    if (!(M > 0.0)) throw ParamError("Weinstein functional is undefined for u = 0");
    return grad_norm_sq(u) * std::pow(M, (2.0 - m.b) / m.dim) / potential_P(u, m);
}

/// Value of J at the ground state with mass q_mass.
inline double weinstein_minimum(double q_mass, const ModelParams& m)
{
    return m.dim / (2.0 + m.dim - m.b) * std::pow(q_mass, (2.0 - m.b) / m.dim);
}

/// RHS minus LHS of the sharp Gagliardo-Nirenberg inequality, given ||Q||^2.
inline double gn_check(const RadialField& u, const ModelParams& m, double q_mass)
{
    if (!m.critical()) throw ParamError("sharp constant is available only at the critical power");
    const double e = (2.0 - m.b) / m.dim;
    const double rhs = std::pow(q_mass, -e) * ((2.0 + m.dim - m.b) / m.dim) * grad_norm_sq(u) * std::pow(mass(u), e);
    return rhs - potential_P(u, m);
}

struct FunctionalReport {
    double energy = 0.0;
    double potential = 0.0;
    double mass = 0.0;
    double grad_sq = 0.0;
    double variance = 0.0;
    double S_omega = 0.0;
    double K_omega = 0.0;
    double I = 0.0;
    double h_omega_norm_sq = 0.0;
    std::optional<double> weinstein;
};

/// All functionals from a single pass over the base quadratures.
inline FunctionalReport report(const RadialField& u, const ModelParams& m)
{
    FunctionalReport r;
    r.mass = mass(u);
    r.grad_sq = grad_norm_sq(u);
    r.variance = variance(u);
    r.potential = potential_P(u, m);
    const double g2 = m.gamma * m.gamma;
    r.energy = 0.5 * r.grad_sq + 0.5 * g2 * r.variance - m.coupling * r.potential / (m.p + 1.0);
    const double w = m.omega.value_or(0.0);
    r.h_omega_norm_sq = r.grad_sq + g2 * r.variance + w * r.mass;
    r.S_omega = r.energy + 0.5 * w * r.mass;
    r.K_omega = r.h_omega_norm_sq - m.coupling * r.potential;
    r.I = r.grad_sq - g2 * r.variance - virial_coefficient(m) * m.coupling * r.potential;
    if (m.critical() && r.mass > 0.0) r.weinstein = r.grad_sq * std::pow(r.mass, (2.0 - m.b) / m.dim) / r.potential;
    return r;
}

enum class SetLabel { K_minus, K_plus, R_plus, R_minus_only, outside };

inline const char* to_string(SetLabel l)
{
    switch (l) {
    case SetLabel::K_minus: return "K_minus";
    case SetLabel::K_plus: return "K_plus";
    case SetLabel::R_plus: return "R_plus";
    case SetLabel::R_minus_only: return "R_minus_only";
    case SetLabel::outside: return "outside";
    }
    return "?";
}

class AmbiguousLabel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Sort u into the invariant sets below the level d. A sign that cannot be
 * certified (|K| or |I| inside band * ||u||^2_{H_omega}) raises AmbiguousLabel.
 * R_minus_only is reported for S < d, K = 0 exactly, which the band excludes.
 */
inline SetLabel classify_set(const RadialField& u, const ModelParams& m, double d, double band = 1e-9)
{
    if (!(d > 0.0)) throw ParamError("classification level d must be positive");
    const double w = m.omega_value();
    ModelParams mw = m;
    mw.omega = w;
    const FunctionalReport r = report(u, mw);
    if (!(r.S_omega < d)) return SetLabel::outside;
    const double scale = band * std::abs(r.h_omega_norm_sq);
    if (std::abs(r.K_omega) < scale) throw AmbiguousLabel("K_omega inside the certification band");
    if (r.K_omega > 0.0) return SetLabel::R_plus;
    if (std::abs(r.I) < scale) throw AmbiguousLabel("I inside the certification band");
    return r.I < 0.0 ? SetLabel::K_minus : SetLabel::K_plus;
}

} // namespace igp
