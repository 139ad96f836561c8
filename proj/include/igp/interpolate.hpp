#pragma once

#include "core.hpp"

#include <cmath>
#include <cstddef>

namespace igp {

/**
 * Four-point cubic Lagrange interpolant of a radial field. Ghost values
 * reflect evenly across the origin (r_{-1-k} = -r_k on a cell-centred grid)
 * and vanish past the last node, matching the Dirichlet convention. Values at
 * the nodes are reproduced exactly.
 */
class RadialInterpolant {
public:
    explicit RadialInterpolant(RadialField u) : u_(std::move(u)) {}

    const RadialField& field() const { return u_; }

    cplx operator()(double r) const
    {
        const auto& g = u_.grid();
        const double h = g.h();
        const double x = std::abs(r) / h - 0.5;
        const double fl = std::floor(x);
        const long i0 = static_cast<long>(fl);
        const double s = x - fl;
        if (s == 0.0) return node(i0);
        if (i0 >= static_cast<long>(g.size()) + 1) return 0.0;
        const cplx f0 = node(i0 - 1), f1 = node(i0), f2 = node(i0 + 1), f3 = node(i0 + 2);
        const double c0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        const double c1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        const double c2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        const double c3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        return c0 * f0 + c1 * f1 + c2 * f2 + c3 * f3;
    }

private:
    cplx node(long i) const
    {
        if (i < 0) i = -1 - i;
        if (i >= static_cast<long>(u_.size())) return 0.0;
        return u_[static_cast<std::size_t>(i)];
    }

    RadialField u_;
};

/// Resample a field onto another grid through the cubic interpolant.
inline RadialField resample(const RadialField& u, GridPtr target, double scale = 1.0)
{
    RadialInterpolant ip(u);
    std::vector<cplx> v(target->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = ip(scale * target->r(i));
    return RadialField(std::move(target), std::move(v));
}

} // namespace igp
