#pragma once

// Finite-difference time stepping for the penalized viscoelastic string:
//
//   (eta^{i+1} - 2 eta^i + eta^{i-1})/dt^2 - (alpha/dt) L(eta^{i+1} - eta^i)
//       - L eta^{i+1} = F^i,
//   F^i_j = (1/eps) [eta^i_j < 0] ((eta^i_j - eta^{i-1}_j)/dt)^-,
//
// with L the standard second difference over dx^2. The damped-wave part is
// implicit (one tridiagonal solve per step with a constant matrix), the
// penalty is explicit.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "obstring/core.hpp"
#include "obstring/diagnostics/energy.hpp"
#include "obstring/trisolve.hpp"

namespace obstring {

/// Nodal penalty force density, >= 0 everywhere and 0 at the endpoints.
struct PenaltyField {
    std::vector<double> values;
};

inline PenaltyField penalty_force(std::span<const double> eta_curr, std::span<const double> eta_prev, double dt,
                                  double epsilon)
{
    const std::size_t n = eta_curr.size();
    if (eta_prev.size() != n)
        throw ContractError("penalty_force: length mismatch");
    PenaltyField f{std::vector<double>(n, 0.0)};
    for (std::size_t j = 1; j + 1 < n; ++j) {
        if (!(eta_curr[j] < 0.0))
            continue;
        const double v = (eta_curr[j] - eta_prev[j]) / dt;
        if (v < 0.0)
            f.values[j] = -v / epsilon;
    }
    return f;
}

/// eta^1 = eta0 + dt v0, endpoints re-pinned to eta0's endpoint values.
inline StringState first_step(std::span<const double> eta0, std::span<const double> v0, double dt)
{
    if (eta0.size() != v0.size() || eta0.size() < 2)
        throw ContractError("first_step: inconsistent initial data");
    StringState s;
    s.step_index = 1;
    s.eta_prev.assign(eta0.begin(), eta0.end());
    s.eta_curr.resize(eta0.size());
    for (std::size_t j = 0; j < eta0.size(); ++j)
        s.eta_curr[j] = eta0[j] + dt * v0[j];
    s.eta_curr.front() = eta0.front();
    s.eta_curr.back() = eta0.back();
    return s;
}

/// Step-0 state whose backward-difference velocity equals v0 at interior
/// nodes: eta^{-1} = eta0 - dt v0 (endpoints pinned).
inline StringState ghost_start(std::span<const double> eta0, std::span<const double> v0, double dt)
{
    if (eta0.size() != v0.size() || eta0.size() < 2)
        throw ContractError("ghost_start: inconsistent initial data");
    StringState s;
    s.step_index = 0;
    s.eta_curr.assign(eta0.begin(), eta0.end());
    s.eta_prev.resize(eta0.size());
    for (std::size_t j = 0; j < eta0.size(); ++j)
        s.eta_prev[j] = eta0[j] - dt * v0[j];
    s.eta_prev.front() = eta0.front();
    s.eta_prev.back() = eta0.back();
    return s;
}

/// Right-hand side of the interior system for one step, Dirichlet values
/// folded in.
inline std::vector<double> step_rhs(const StringState& state, std::span<const double> penalty, const SimConfig& cfg)
{
    const std::size_t n = state.eta_curr.size();
    const double dt = cfg.time.dt();
    const double dx = cfg.grid.dx();
    const double inv_dt2 = 1.0 / (dt * dt);
    const double visc = cfg.physics.alpha / dt / (dx * dx);
    const double stiff = (cfg.physics.alpha / dt + 1.0) / (dx * dx);

    const auto& cur = state.eta_curr;
    const auto& old = state.eta_prev;
    std::vector<double> rhs(n - 2);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double lap = cur[j + 1] - 2.0 * cur[j] + cur[j - 1];
        rhs[j - 1] = (2.0 * cur[j] - old[j]) * inv_dt2 - visc * lap + penalty[j];
    }
    rhs.front() += stiff * cfg.boundary_left;
    rhs.back() += stiff * cfg.boundary_right;
    return rhs;
}

/// Advances (eta^{i-1}, eta^i) to (eta^i, eta^{i+1}) with the explicit
/// penalty F^i taken from the given state.
inline StringState step(const StringState& state, const ThomasFactorization& matrix, const SimConfig& cfg,
                        const PenaltyField& penalty)
{
    const std::size_t n = state.eta_curr.size();
    std::vector<double> rhs = step_rhs(state, penalty.values, cfg);
    matrix.solve_in_place(rhs);

    StringState next;
    next.step_index = state.step_index + 1;
    next.eta_prev = state.eta_curr;
    next.eta_curr.resize(n);
    next.eta_curr.front() = cfg.boundary_left;
    next.eta_curr.back() = cfg.boundary_right;
    std::copy(rhs.begin(), rhs.end(), next.eta_curr.begin() + 1);
    return next;
}

inline StringState step(const StringState& state, const ThomasFactorization& matrix, const SimConfig& cfg)
{
    return step(state, matrix, cfg,
                penalty_force(state.eta_curr, state.eta_prev, cfg.time.dt(), cfg.physics.epsilon));
}

/// Max over interior nodes of |LHS - F| of the scheme for three consecutive
/// levels.
inline double scheme_residual(std::span<const double> eta_prev, std::span<const double> eta_curr,
                              std::span<const double> eta_next, std::span<const double> penalty,
                              const SimConfig& cfg)
{
    const double dt = cfg.time.dt();
    const double dx2 = cfg.grid.dx() * cfg.grid.dx();
    const double alpha = cfg.physics.alpha;
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < eta_curr.size(); ++j) {
        const double acc = (eta_next[j] - 2.0 * eta_curr[j] + eta_prev[j]) / (dt * dt);
        const double lap_next = (eta_next[j + 1] - 2.0 * eta_next[j] + eta_next[j - 1]) / dx2;
        const double lap_curr = (eta_curr[j + 1] - 2.0 * eta_curr[j] + eta_curr[j - 1]) / dx2;
        const double lhs = acc - (alpha / dt) * (lap_next - lap_curr) - lap_next;
        worst = std::max(worst, std::abs(lhs - penalty[j]));
    }
    return worst;
}

struct RunResult {
    FieldSeries series;
    EnergyLedger ledger;
    double total_penalty_impulse = 0.0; ///< sum over all steps of F dx dt
};

namespace detail {

inline bool all_finite(std::span<const double> v)
{
    for (double x : v)
        if (!std::isfinite(x))
            return false;
    return true;
}

inline void store_frame(FieldSeries& series, const StringState& state, std::span<const double> velocity,
                        std::span<const double> penalty, double t)
{
    series.times.push_back(t);
    series.steps.push_back(state.step_index);
    series.eta.append_row(state.eta_curr);
    series.velocity.append_row(velocity);
    series.penalty_force.append_row(penalty);
}

} // namespace detail

/// Runs the scheme over the whole horizon. Frames are stored at step 0, every
/// output_stride steps and at the final step; the ledger has one row per step.
inline RunResult run(const SimConfig& input)
{
    const SimConfig cfg = validate_config(input);
    const double dt = cfg.time.dt();
    const double dx = cfg.grid.dx();
    const int steps = cfg.time.steps_m;
    const std::size_t n = cfg.grid.nodes();

    const InitialValues iv = evaluate_initial(cfg.init, cfg.grid);
    const ThomasFactorization matrix(assemble_step_matrix(cfg.grid, cfg.time, cfg.physics));

    RunResult out;
    out.series.grid = cfg.grid;
    out.series.dt = dt;
    out.ledger.rows.push_back(initial_energy_row(iv.eta0, iv.v0, dx));

    StringState state;
    PenaltyField force;
    std::vector<double> v0 = iv.v0;
    v0.front() = 0.0;
    v0.back() = 0.0;

    if (cfg.startup == Startup::SchemeGhost) {
        state = ghost_start(iv.eta0, iv.v0, dt);
        force = penalty_force(state.eta_curr, state.eta_prev, dt, cfg.physics.epsilon);
    } else {
        state.step_index = 0;
        state.eta_prev = iv.eta0;
        state.eta_curr = iv.eta0;
        force.values.assign(n, 0.0);
    }
    detail::store_frame(out.series, state, v0, force.values, 0.0);

    // Step forces since the last stored frame; their mean replaces that
    // frame's penalty row once the next frame is stored.
    std::vector<double> force_sum(n, 0.0);
    int force_count = 0;

    std::vector<double> velocity(n);
    for (int i = 0; i < steps; ++i) {
        StringState next = (i == 0 && cfg.startup == Startup::Explicit) ? first_step(iv.eta0, iv.v0, dt)
                                                                         : step(state, matrix, cfg, force);
        if (!detail::all_finite(next.eta_curr))
            throw NumericError("non-finite displacement at step " + std::to_string(next.step_index),
                               next.step_index);

        double impulse = 0.0;
        for (double f : force.values)
            impulse += f;
        out.total_penalty_impulse += impulse * dx * dt;

        energy_step(out.ledger, state, next, force.values, cfg);
        for (std::size_t j = 0; j < n; ++j)
            force_sum[j] += force.values[j];
        ++force_count;

        state = std::move(next);
        force = penalty_force(state.eta_curr, state.eta_prev, dt, cfg.physics.epsilon);

        if (state.step_index % cfg.output_stride == 0 || state.step_index == steps) {
            for (std::size_t j = 0; j < n; ++j)
                velocity[j] = state.velocity(j, dt);
            auto last = out.series.penalty_force.row(out.series.stored() - 1);
            for (std::size_t j = 0; j < n; ++j)
                last[j] = force_sum[j] / force_count;
            std::fill(force_sum.begin(), force_sum.end(), 0.0);
            force_count = 0;
            detail::store_frame(out.series, state, velocity, force.values, cfg.time.t(state.step_index));
        }
    }
    return out;
}

/// Per-frame scheme residuals recomputed from stored fields. Only frames whose
/// two predecessors are the immediately preceding solver steps are checked;
/// entry s is NaN when that is not the case.
inline std::vector<double> stored_scheme_residuals(const FieldSeries& series, const SimConfig& cfg)
{
    std::vector<double> out(series.stored(), NAN);
    for (std::size_t s = 1; s + 1 < series.stored(); ++s) {
        if (series.steps[s] - series.steps[s - 1] != 1 || series.steps[s + 1] - series.steps[s] != 1)
            continue;
        out[s] = scheme_residual(series.eta.row(s - 1), series.eta.row(s), series.eta.row(s + 1),
                                 series.penalty_force.row(s), cfg);
    }
    return out;
}

} // namespace obstring
