#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace igp {

class LinearSolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Solve A x = rhs for tridiagonal A given as (lower, diag, upper), where
 * lower[0] and upper[n-1] are ignored. Gaussian elimination with partial
 * pivoting; the fill-in creates a second superdiagonal.
 */
template <class T>
std::vector<T> solve_tridiagonal(std::vector<T> lower, std::vector<T> diag, std::vector<T> upper,
                                 std::vector<T> rhs)
{
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n)
        throw LinearSolveError("tridiagonal system with inconsistent sizes");
    if (n == 0) return rhs;
    using std::abs;
    std::vector<T> upper2(n, T(0));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        // row i has (diag[i], upper[i], upper2[i]); row i+1 has (lower[i+1], diag[i+1], upper[i+1])
        if (abs(lower[i + 1]) > abs(diag[i])) {
            std::swap(diag[i], lower[i + 1]);
            std::swap(upper[i], diag[i + 1]);
            std::swap(upper2[i], upper[i + 1]);
            std::swap(rhs[i], rhs[i + 1]);
        }
        if (diag[i] == T(0)) throw LinearSolveError("singular tridiagonal matrix");
        const T m = lower[i + 1] / diag[i];
        diag[i + 1] -= m * upper[i];
        upper[i + 1] -= m * upper2[i];
        rhs[i + 1] -= m * rhs[i];
        lower[i + 1] = T(0);
    }
    if (diag[n - 1] == T(0)) throw LinearSolveError("singular tridiagonal matrix");
    std::vector<T> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    if (n >= 2) x[n - 2] = (rhs[n - 2] - upper[n - 2] * x[n - 1]) / diag[n - 2];
    for (std::size_t k = n - 2; k-- > 0;) x[k] = (rhs[k] - upper[k] * x[k + 1] - upper2[k] * x[k + 2]) / diag[k];
    for (const auto& v : x)
        if (!std::isfinite(abs(v))) throw LinearSolveError("non-finite tridiagonal solution");
    return x;
}

/// LU factors of a diagonally dominant tridiagonal matrix, reused across solves.
template <class T>
class ThomasFactor {
public:
    ThomasFactor() = default;
    ThomasFactor(const std::vector<T>& lower, const std::vector<T>& diag, const std::vector<T>& upper)
        : lower_(lower), upper_(upper), inv_pivot_(diag.size())
    {
        const std::size_t n = diag.size();
        if (lower.size() != n || upper.size() != n) throw LinearSolveError("inconsistent sizes");
        ratio_.assign(n, T(0));
        T piv = diag[0];
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) {
                ratio_[i] = lower[i] * inv_pivot_[i - 1];
                piv = diag[i] - ratio_[i] * upper[i - 1];
            }
            using std::abs;
            if (abs(piv) == 0.0) throw LinearSolveError("zero pivot in Thomas factorization");
            inv_pivot_[i] = T(1) / piv;
        }
    }

    std::size_t size() const { return inv_pivot_.size(); }

    void solve_in_place(std::vector<T>& x) const
    {
        const std::size_t n = inv_pivot_.size();
        for (std::size_t i = 1; i < n; ++i) x[i] -= ratio_[i] * x[i - 1];
        x[n - 1] *= inv_pivot_[n - 1];
        for (std::size_t k = n - 1; k-- > 0;) x[k] = (x[k] - upper_[k] * x[k + 1]) * inv_pivot_[k];
    }

private:
    std::vector<T> lower_, upper_, inv_pivot_, ratio_;
};

} // namespace igp
