#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace igp {

using cplx = std::complex<double>;

/// Raised for parameter records that violate the model's admissible ranges.
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by iterative solvers; `kind` is a stable machine-readable tag.
class SolverError : public std::runtime_error {
public:
    SolverError(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

enum class Criticality { subcritical, critical, supercritical };

inline const char* to_string(Criticality c)
{
    switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical: return "critical";
    case Criticality::supercritical: return "supercritical";
    }
    return "?";
}

/// Unvalidated parameter record, as read from a config or built by hand.
struct RawParams {
    int dim = 3;
    double b = 0.5;
    double p = 2.0;
    double gamma = 1.0;
    std::optional<double> omega;
    /// Coefficient in front of the focusing term; 0 gives the linear oscillator.
    double coupling = 1.0;
};

struct ModelParams {
    int dim = 3;
    double b = 0.5;
    double p = 2.0;
    double gamma = 1.0;
    std::optional<double> omega;
    double coupling = 1.0;
    Criticality criticality = Criticality::critical;
    double p_crit = 2.0;
    double p_upper = 4.0;

    double omega_value() const
    {
        if (!omega) throw ParamError("omega is required for this operation");
        return *omega;
    }
    bool critical() const { return criticality == Criticality::critical; }

    ModelParams with_omega(double w) const
    {
        ModelParams q = *this;
        if (!(w > -gamma * dim)) {
            std::ostringstream os;
            os << "omega must satisfy omega > -gamma*N = " << -gamma * dim;
            throw ParamError(os.str());
        }
        q.omega = w;
        return q;
    }
};

inline double critical_power(int dim, double b) { return 1.0 + (4.0 - 2.0 * b) / dim; }

inline double upper_power(int dim, double b)
{
    if (dim >= 3) return 1.0 + (4.0 - 2.0 * b) / (dim - 2);
    return std::numeric_limits<double>::infinity();
}

inline ModelParams validate_params(const RawParams& raw)
{
    if (raw.dim < 1) throw ParamError("dimension N must satisfy N >= 1");
    const double bmax = std::min(2.0, static_cast<double>(raw.dim));
    if (!(raw.b > 0.0 && raw.b < bmax)) throw ParamError("b must satisfy 0<b<min{2,N}");
    const double pc = critical_power(raw.dim, raw.b);
    const double pu = upper_power(raw.dim, raw.b);
    if (!(raw.p > 1.0 && raw.p < pu)) {
        std::ostringstream os;
        os << "p must satisfy 1<p<" << pu << " (upper power for N=" << raw.dim << ", b=" << raw.b << ")";
        throw ParamError(os.str());
    }
    if (!(raw.gamma > 0.0) || !std::isfinite(raw.gamma)) throw ParamError("gamma must satisfy gamma>0");
    if (raw.omega && !(*raw.omega > -raw.gamma * raw.dim)) {
        std::ostringstream os;
        os << "omega must satisfy omega > -gamma*N = " << -raw.gamma * raw.dim;
        throw ParamError(os.str());
    }
    if (!std::isfinite(raw.coupling)) throw ParamError("coupling must be finite");

    ModelParams m;
    m.dim = raw.dim;
    m.b = raw.b;
    m.p = raw.p;
    m.gamma = raw.gamma;
    m.omega = raw.omega;
    m.coupling = raw.coupling;
    m.p_crit = pc;
    m.p_upper = pu;
    if (std::abs(raw.p - pc) <= 1e-12)
        m.criticality = Criticality::critical;
    else
        m.criticality = raw.p < pc ? Criticality::subcritical : Criticality::supercritical;
    return m;
}

/// |z|^e computed from |z|^2, with shortcuts for half-integer exponents.
inline double modulus_power(double norm2, double e)
{
    if (e == 1.0) return std::sqrt(norm2);
    if (e == 2.0) return norm2;
    if (e == 0.5) return std::sqrt(std::sqrt(norm2));
    if (e == 1.5) return norm2 == 0.0 ? 0.0 : norm2 / std::sqrt(std::sqrt(norm2));
    if (e == 3.0) return norm2 * std::sqrt(norm2);
    return norm2 == 0.0 ? 0.0 : std::pow(norm2, 0.5 * e);
}

/// Surface area of the unit sphere in R^N.
inline double unit_sphere_area(int dim)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

/**
 * Cell-centred radial mesh r_i = (i + 1/2) h, i = 0..n-1, with rmax = n h.
 *
 * Node weights are the midpoint rule w_i = |S^{N-1}| r_i^{N-1} h. Face j sits
 * between nodes j and j+1 at radius (j+1) h with weight |S^{N-1}| r_f^{N-1} h.
 * The face at r = 0 carries zero weight (even extension).
 */
class RadialGrid {
public:
    RadialGrid(int dim, double h, double rmax) : dim_(dim), h_(h)
    {
        if (dim < 1) throw ParamError("grid dimension must be >= 1");
        if (!(h > 0.0) || !(rmax > h)) throw ParamError("grid requires 0 < h < rmax");
        const auto n = static_cast<std::size_t>(std::llround(rmax / h));
        if (n < 4) throw ParamError("grid needs at least 4 nodes");
        rmax_ = static_cast<double>(n) * h;
        const double area = unit_sphere_area(dim);
        r_.resize(n);
        w_.resize(n);
        wf_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            r_[i] = (static_cast<double>(i) + 0.5) * h;
            w_[i] = area * std::pow(r_[i], dim - 1) * h;
            wf_[i] = area * std::pow(static_cast<double>(i + 1) * h, dim - 1) * h;
        }
    }

    std::size_t size() const { return r_.size(); }
    int dim() const { return dim_; }
    double h() const { return h_; }
    double rmax() const { return rmax_; }
    double r(std::size_t i) const { return r_[i]; }
    double weight(std::size_t i) const { return w_[i]; }
    /// Weight of the face between nodes i and i+1 (the last face lies at rmax).
    double face_weight(std::size_t i) const { return wf_[i]; }
    double face_r(std::size_t i) const { return static_cast<double>(i + 1) * h_; }
    const std::vector<double>& radii() const { return r_; }
    const std::vector<double>& weights() const { return w_; }
    const std::vector<double>& face_weights() const { return wf_; }

private:
    int dim_;
    double h_;
    double rmax_ = 0.0;
    std::vector<double> r_, w_, wf_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(int dim, double h, double rmax)
{
    return std::make_shared<const RadialGrid>(dim, h, rmax);
}

/// Complex radial profile; the value beyond the last node is zero.
class RadialField {
public:
    RadialField() = default;
    explicit RadialField(GridPtr g) : grid_(std::move(g)), v_(grid_->size(), cplx(0.0)) {}
    RadialField(GridPtr g, std::vector<cplx> values) : grid_(std::move(g)), v_(std::move(values))
    {
        if (v_.size() != grid_->size()) throw std::invalid_argument("field length does not match grid");
        for (const auto& z : v_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw std::invalid_argument("field contains non-finite entries");
    }

    template <class F>
    static RadialField sample(GridPtr g, F&& f)
    {
        std::vector<cplx> v(g->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(f(g->r(i)));
        return RadialField(std::move(g), std::move(v));
    }

    static RadialField from_real(GridPtr g, const std::vector<double>& re)
    {
        std::vector<cplx> v(re.begin(), re.end());
        return RadialField(std::move(g), std::move(v));
    }

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    const std::vector<cplx>& values() const { return v_; }
    std::vector<cplx>& values() { return v_; }
    cplx operator[](std::size_t i) const { return v_[i]; }
    cplx& operator[](std::size_t i) { return v_[i]; }

    std::vector<double> real_part() const
    {
        std::vector<double> out(v_.size());
        for (std::size_t i = 0; i < v_.size(); ++i) out[i] = v_[i].real();
        return out;
    }

    RadialField scaled(cplx s) const
    {
        RadialField o = *this;
        for (auto& z : o.v_) z *= s;
        return o;
    }

private:
    GridPtr grid_;
    std::vector<cplx> v_;
};

inline RadialField operator+(const RadialField& a, const RadialField& b)
{
    RadialField o = a;
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += b[i];
    return o;
}

inline RadialField operator-(const RadialField& a, const RadialField& b)
{
    RadialField o = a;
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= b[i];
    return o;
}

template <class T>
T integrate_radial(const std::vector<T>& g, const RadialGrid& grid)
{
    if (g.size() != grid.size()) throw std::invalid_argument("integrand length does not match grid");
    T s{};
    for (std::size_t i = 0; i < g.size(); ++i) s += grid.weight(i) * g[i];
    return s;
}

inline double mass(const RadialField& u)
{
    const auto& g = u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += g.weight(i) * std::norm(u[i]);
    return s;
}

/// Sum over faces of |u_{j+1} - u_j|^2 / h^2 with u_n = 0.
inline double grad_norm_sq(const RadialField& u)
{
    const auto& g = u.grid();
    const std::size_t n = u.size();
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx next = j + 1 < n ? u[j + 1] : cplx(0.0);
        s += g.face_weight(j) * std::norm(next - u[j]);
    }
    return s / (g.h() * g.h());
}

inline double variance(const RadialField& u)
{
    const auto& g = u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += g.weight(i) * g.r(i) * g.r(i) * std::norm(u[i]);
    return s;
}

inline double sigma_norm_sq(const RadialField& u) { return grad_norm_sq(u) + variance(u); }

/// L^2 inner product <u, v> = sum w conj(u) v.
inline cplx inner(const RadialField& u, const RadialField& v)
{
    const auto& g = u.grid();
    cplx s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += g.weight(i) * std::conj(u[i]) * v[i];
    return s;
}

/// Gradient pairing sum over faces of conj(Du) Dv.
inline cplx grad_inner(const RadialField& u, const RadialField& v)
{
    const auto& g = u.grid();
    const std::size_t n = u.size();
    cplx s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const cplx du = (j + 1 < n ? u[j + 1] : cplx(0.0)) - u[j];
        const cplx dv = (j + 1 < n ? v[j + 1] : cplx(0.0)) - v[j];
        s += g.face_weight(j) * std::conj(du) * dv;
    }
    return s / (g.h() * g.h());
}

/// Sigma-space inner product: gradient pairing plus the |x|^2-weighted pairing.
inline cplx sigma_inner(const RadialField& u, const RadialField& v)
{
    const auto& g = u.grid();
    cplx s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += g.weight(i) * g.r(i) * g.r(i) * std::conj(u[i]) * v[i];
    return s + grad_inner(u, v);
}

/// Coefficients of the operator -Laplacian on the grid: (-L u)_i = d_i u_i + l_i u_{i-1} + s_i u_{i+1}.
struct LaplacianStencil {
    std::vector<double> lower, diag, upper;
};

inline LaplacianStencil neg_laplacian_stencil(const RadialGrid& g)
{
    const std::size_t n = g.size();
    LaplacianStencil st;
    st.lower.assign(n, 0.0);
    st.diag.assign(n, 0.0);
    st.upper.assign(n, 0.0);
    const double h2 = g.h() * g.h();
    for (std::size_t i = 0; i < n; ++i) {
        const double right = g.face_weight(i);
        const double left = i > 0 ? g.face_weight(i - 1) : 0.0;
        const double c = 1.0 / (g.weight(i) * h2);
        st.diag[i] = (left + right) * c;
        st.lower[i] = -left * c;
        st.upper[i] = i + 1 < n ? -right * c : 0.0;
    }
    return st;
}

template <class T>
std::vector<T> apply_stencil(const LaplacianStencil& st, const std::vector<T>& u)
{
    const std::size_t n = u.size();
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        T v = st.diag[i] * u[i];
        if (i > 0) v += st.lower[i] * u[i - 1];
        if (i + 1 < n) v += st.upper[i] * u[i + 1];
        out[i] = v;
    }
    return out;
}

inline std::vector<cplx> neg_laplacian(const RadialField& u)
{
    return apply_stencil(neg_laplacian_stencil(u.grid()), u.values());
}

} // namespace igp
