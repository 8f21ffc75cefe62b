#pragma once

// Tridiagonal systems for the implicit part of the string scheme.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "obstring/core.hpp"

namespace obstring {

/// Row k reads lower[k-1] x[k-1] + diag[k] x[k] + upper[k] x[k+1].
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    std::size_t size() const { return diag.size(); }

    /// Infinity norm (max absolute row sum).
    double norm_inf() const
    {
        double best = 0.0;
        for (std::size_t k = 0; k < diag.size(); ++k) {
            double row = std::abs(diag[k]);
            if (k > 0)
                row += std::abs(lower[k - 1]);
            if (k + 1 < diag.size())
                row += std::abs(upper[k]);
            best = std::max(best, row);
        }
        return best;
    }

    std::vector<double> multiply(std::span<const double> x) const
    {
        const std::size_t n = diag.size();
        std::vector<double> y(n);
        for (std::size_t k = 0; k < n; ++k) {
            double acc = diag[k] * x[k];
            if (k > 0)
                acc += lower[k - 1] * x[k - 1];
            if (k + 1 < n)
                acc += upper[k] * x[k + 1];
            y[k] = acc;
        }
        return y;
    }

    /// Smallest ratio |diag| / (|lower| + |upper|) over all rows.
    double dominance_ratio() const
    {
        double ratio = INFINITY;
        for (std::size_t k = 0; k < diag.size(); ++k) {
            double off = 0.0;
            if (k > 0)
                off += std::abs(lower[k - 1]);
            if (k + 1 < diag.size())
                off += std::abs(upper[k]);
            if (off > 0.0)
                ratio = std::min(ratio, std::abs(diag[k]) / off);
        }
        return ratio;
    }
};

/// Implicit operator on interior nodes 1..N-1:
/// (1/dt^2) I - (alpha/dt + 1) L, with L the second difference over dx^2.
/// Dirichlet rows are not part of the system.
inline Tridiagonal assemble_step_matrix(const Grid1D& grid, const TimeGrid& time, const Physics& physics)
{
    const double dt = time.dt();
    const double dx = grid.dx();
    const double stiff = (physics.alpha / dt + 1.0) / (dx * dx);
    const std::size_t n = static_cast<std::size_t>(grid.cells_n - 1);

    Tridiagonal m;
    m.diag.assign(n, 1.0 / (dt * dt) + 2.0 * stiff);
    m.lower.assign(n > 0 ? n - 1 : 0, -stiff);
    m.upper.assign(n > 0 ? n - 1 : 0, -stiff);
    return m;
}

/// LU factors of a tridiagonal matrix (Thomas algorithm). The forward sweep
/// is done once; solve() is O(n) and does not modify the factorization.
class ThomasFactorization {
public:
    explicit ThomasFactorization(const Tridiagonal& m) : lower_(m.lower), pivot_(m.size()), upper_ratio_(m.size())
    {
        const std::size_t n = m.size();
        if (n == 0)
            return;
        if (m.lower.size() + 1 != n || m.upper.size() + 1 != n)
            throw ContractError("ThomasFactorization: inconsistent band lengths");

        const double scale = m.norm_inf();
        for (std::size_t k = 0; k < n; ++k) {
            double p = m.diag[k];
            if (k > 0)
                p -= m.lower[k - 1] * upper_ratio_[k - 1];
            if (!(std::abs(p) > 1e-300) || std::abs(p) <= 1e-14 * scale)
                throw NumericError("zero pivot in tridiagonal solve at row " + std::to_string(k),
                                   static_cast<std::ptrdiff_t>(k));
            pivot_[k] = p;
            upper_ratio_[k] = (k + 1 < n) ? m.upper[k] / p : 0.0;
        }
    }

    std::size_t size() const { return pivot_.size(); }

    std::vector<double> solve(std::span<const double> rhs) const
    {
        std::vector<double> x(rhs.begin(), rhs.end());
        solve_in_place(x);
        return x;
    }

    void solve_in_place(std::span<double> x) const
    {
        const std::size_t n = pivot_.size();
        if (x.size() != n)
            throw ContractError("ThomasFactorization::solve: rhs length " + std::to_string(x.size()) +
                                " != " + std::to_string(n));
        if (n == 0)
            return;
        x[0] /= pivot_[0];
        for (std::size_t k = 1; k < n; ++k)
            x[k] = (x[k] - lower_[k - 1] * x[k - 1]) / pivot_[k];
        for (std::size_t k = n - 1; k-- > 0;)
            x[k] -= upper_ratio_[k] * x[k + 1];
    }

private:
    std::vector<double> lower_;
    std::vector<double> pivot_;
    std::vector<double> upper_ratio_;
};

inline std::vector<double> thomas_solve(const Tridiagonal& m, std::span<const double> rhs)
{
    return ThomasFactorization(m).solve(rhs);
}

} // namespace obstring
