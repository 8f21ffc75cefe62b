#pragma once

// Discrete energy bookkeeping.
//
// With v^{i+1} = (eta^{i+1} - eta^i)/dt and the cell gradient
// (D eta)_{j+1/2} = (eta_{j+1} - eta_j)/dx, testing the scheme with
// eta^{i+1} - eta^i gives
//
//   E^{i+1} - E^i + alpha dt |D v^{i+1}|^2 + (numerical dissipation)
//       = dt sum_j F^i_j v^{i+1}_j dx,
//
// where E = 1/2 |v|^2 + 1/2 |D eta|^2. The ledger stores the two energies,
// the cumulative viscous dissipation and the cumulative contact work, so the
// residual below is minus the accumulated numerical dissipation (<= 0).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "obstring/core.hpp"

namespace obstring {

struct EnergyRow {
    int step = 0;
    double t = 0.0;
    double kinetic = 0.0;
    double elastic = 0.0;
    double visc_dissip_cum = 0.0;
    double contact_work_cum = 0.0;
    double residual = 0.0;

    double total() const { return kinetic + elastic; }
};

struct EnergyLedger {
    std::vector<EnergyRow> rows;

    bool empty() const { return rows.empty(); }
    double initial_energy() const { return rows.empty() ? 0.0 : rows.front().total(); }
};

namespace detail {

inline double half_sq_sum(std::span<const double> v, double dx)
{
    double acc = 0.0;
    for (double x : v)
        acc += x * x;
    return 0.5 * acc * dx;
}

inline double half_grad_sq(std::span<const double> eta, double dx)
{
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < eta.size(); ++j) {
        const double g = (eta[j + 1] - eta[j]) / dx;
        acc += g * g;
    }
    return 0.5 * acc * dx;
}

} // namespace detail

inline double ledger_residual(const EnergyRow& row, const EnergyRow& first)
{
    return (row.kinetic + row.elastic) - (first.kinetic + first.elastic) + row.visc_dissip_cum - row.contact_work_cum;
}

/// Step-0 row from the initial displacement and velocity. Boundary
/// velocities are ignored (the endpoints are pinned).
inline EnergyRow initial_energy_row(std::span<const double> eta0, std::span<const double> v0, double dx)
{
    std::vector<double> v(v0.begin(), v0.end());
    if (!v.empty()) {
        v.front() = 0.0;
        v.back() = 0.0;
    }
    EnergyRow row;
    row.kinetic = detail::half_sq_sum(v, dx);
    row.elastic = detail::half_grad_sq(eta0, dx);
    return row;
}

/// Appends the row for the transition eta^i -> eta^{i+1} driven by the
/// penalty field F^i. `prev` holds (eta^{i-1}, eta^i), `next` holds
/// (eta^i, eta^{i+1}).
inline void energy_step(EnergyLedger& ledger, const StringState& prev, const StringState& next,
                        std::span<const double> penalty, const SimConfig& cfg)
{
    if (ledger.rows.empty())
        throw ContractError("energy_step: ledger has no initial row");
    const std::size_t n = next.eta_curr.size();
    if (prev.eta_curr.size() != n || penalty.size() != n)
        throw ContractError("energy_step: inconsistent dimensions");

    const double dt = cfg.time.dt();
    const double dx = cfg.grid.dx();

    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j)
        v[j] = (next.eta_curr[j] - next.eta_prev[j]) / dt;

    double work = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        work += penalty[j] * v[j];

    const EnergyRow& last = ledger.rows.back();
    EnergyRow row;
    row.step = next.step_index;
    row.t = cfg.time.t(next.step_index);
    row.kinetic = detail::half_sq_sum(v, dx);
    row.elastic = detail::half_grad_sq(next.eta_curr, dx);
    row.visc_dissip_cum = last.visc_dissip_cum + dt * cfg.physics.alpha * 2.0 * detail::half_grad_sq(v, dx);
    row.contact_work_cum = last.contact_work_cum + dt * work * dx;
    row.residual = ledger_residual(row, ledger.rows.front());
    ledger.rows.push_back(row);
}

struct EnergyMonotonicity {
    std::size_t violations = 0;
    double worst_increase = 0.0; ///< largest E_{k+1} - E_k seen
    double tolerance = 0.0;
};

/// Counts steps where kinetic+elastic grows by more than rel_tol * E(0).
inline EnergyMonotonicity check_energy_monotone(const EnergyLedger& ledger, double rel_tol = 1e-8)
{
    EnergyMonotonicity out;
    out.tolerance = rel_tol * ledger.initial_energy();
    out.worst_increase = -INFINITY;
    for (std::size_t k = 1; k < ledger.rows.size(); ++k) {
        const double inc = ledger.rows[k].total() - ledger.rows[k - 1].total();
        out.worst_increase = std::max(out.worst_increase, inc);
        if (inc > out.tolerance)
            ++out.violations;
    }
    return out;
}

} // namespace obstring
