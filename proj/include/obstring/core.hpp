#pragma once

// Domain types used throughout the library. Holds the grids and physical
// parameters together with initial data and the validated run config.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <utility>
#include <vector>

namespace obstring {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Invalid user configuration. `field` names the offending key, e.g.
/// "[physics].epsilon".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field))
    {
    }

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Solver failure (zero pivot, NaN/Inf in the state). `index` is the pivot
/// row or the time step, depending on where it was raised.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::ptrdiff_t index)
        : std::runtime_error(what), index_(index)
    {
    }

    std::ptrdiff_t index() const noexcept { return index_; }

private:
    std::ptrdiff_t index_;
};

/// A probe or helper was called outside its documented preconditions.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Grids and parameters
// ---------------------------------------------------------------------------

struct Grid1D {
    double length_l = 1.0;
    int cells_n = 2;

    double dx() const { return length_l / cells_n; }
    std::size_t nodes() const { return static_cast<std::size_t>(cells_n) + 1; }
    double x(std::size_t j) const
    {
        // x_N hits length_l exactly instead of accumulating j*dx rounding
        if (j == static_cast<std::size_t>(cells_n))
            return length_l;
        return static_cast<double>(j) * dx();
    }
    std::vector<double> coordinates() const
    {
        std::vector<double> xs(nodes());
        for (std::size_t j = 0; j < xs.size(); ++j)
            xs[j] = x(j);
        return xs;
    }

    bool operator==(const Grid1D&) const = default;
};

struct TimeGrid {
    double horizon_T = 1.0;
    int steps_m = 1;

    double dt() const { return horizon_T / steps_m; }
    double t(int i) const { return i == steps_m ? horizon_T : i * dt(); }

    bool operator==(const TimeGrid&) const = default;
};

struct Physics {
    double alpha = 0.0;   ///< viscoelastic damping coefficient
    double epsilon = 1.0; ///< penalty parameter

    bool operator==(const Physics&) const = default;
};

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// eta0 = 1 + sin^2(10 pi x)/2, v0 = -50.
struct Example1 {
    bool operator==(const Example1&) const = default;
};

/// Piecewise displacement with a fast left half and a slow right half.
struct Example2 {
    bool operator==(const Example2&) const = default;
};

/// eta0 = offset + amplitude sin(mode pi x / l), v0(x) = v0 sin(mode pi x / l).
struct SingleMode {
    double amplitude = 0.0;
    int mode = 1;
    double offset = 1.0;
    double v0 = 0.0;

    bool operator==(const SingleMode&) const = default;
};

struct Tabulated {
    std::vector<double> eta0;
    std::vector<double> v0;

    bool operator==(const Tabulated&) const = default;
};

using InitialData = std::variant<Example1, Example2, SingleMode, Tabulated>;

inline std::string init_kind_name(const InitialData& init)
{
    struct Visitor {
        std::string operator()(const Example1&) const { return "example1"; }
        std::string operator()(const Example2&) const { return "example2"; }
        std::string operator()(const SingleMode&) const { return "single_mode"; }
        std::string operator()(const Tabulated&) const { return "tabulated"; }
    };
    return std::visit(Visitor{}, init);
}

struct InitialValues {
    std::vector<double> eta0;
    std::vector<double> v0;
};

namespace detail {

inline double example1_eta(double x)
{
    const double s = std::sin(10.0 * std::numbers::pi * x);
    return 1.0 + 0.5 * s * s;
}

inline double example2_eta(double x)
{
    if (x < 0.2)
        return x;
    if (x < 0.8)
        return std::sin(std::numbers::pi * (x - 0.2) / 0.3);
    return 2.0 - x;
}

inline double example2_v(double x) { return x < 0.6 ? -50.0 : -0.5; }

} // namespace detail

/// Closed-form initial displacement/velocity at an arbitrary point. Tabulated
/// data is interpolated linearly on the uniform grid it was given on.
inline std::pair<double, double> initial_at(const InitialData& init, double x, double length_l)
{
    if (std::holds_alternative<Example1>(init))
        return {detail::example1_eta(x), -50.0};
    if (std::holds_alternative<Example2>(init))
        return {detail::example2_eta(x), detail::example2_v(x)};
    if (const auto* m = std::get_if<SingleMode>(&init)) {
        const double s = std::sin(m->mode * std::numbers::pi * x / length_l);
        return {m->offset + m->amplitude * s, m->v0 * s};
    }
    const auto& tab = std::get<Tabulated>(init);
    const std::size_t cells = tab.eta0.size() - 1;
    const double pos = std::clamp(x / length_l, 0.0, 1.0) * static_cast<double>(cells);
    const std::size_t j = std::min(static_cast<std::size_t>(pos), cells - 1);
    const double w = pos - static_cast<double>(j);
    return {(1.0 - w) * tab.eta0[j] + w * tab.eta0[j + 1], (1.0 - w) * tab.v0[j] + w * tab.v0[j + 1]};
}

/// Samples the initial data on the grid nodes.
inline InitialValues evaluate_initial(const InitialData& init, const Grid1D& grid)
{
    const std::size_t n = grid.nodes();
    InitialValues out{std::vector<double>(n), std::vector<double>(n)};

    if (const auto* tab = std::get_if<Tabulated>(&init)) {
        if (tab->eta0.size() != n || tab->v0.size() != n)
            throw ConfigError("[init].file", "tabulated data has " + std::to_string(tab->eta0.size()) + "/" +
                                                 std::to_string(tab->v0.size()) + " values, grid has " +
                                                 std::to_string(n) + " nodes");
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(tab->eta0[j]) || !std::isfinite(tab->v0[j]))
                throw ConfigError("[init].file", "non-finite value at node " + std::to_string(j));
            if (tab->eta0[j] < 0.0)
                throw ConfigError("[init].file", "negative eta0 at node " + std::to_string(j));
        }
        out.eta0 = tab->eta0;
        out.v0 = tab->v0;
        return out;
    }

    for (std::size_t j = 0; j < n; ++j) {
        const auto [eta, v] = initial_at(init, grid.x(j), grid.length_l);
        out.eta0[j] = eta;
        out.v0[j] = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// How the second time level is produced from (eta0, v0).
enum class Startup {
    /// Apply the scheme once with the ghost level eta^{-1} = eta0 - dt v0.
    /// Keeps the discrete energy identity valid from step 0.
    SchemeGhost,
    /// eta^1 = eta0 + dt v0 with pinned boundary nodes.
    Explicit,
};

struct SimConfig {
    Grid1D grid;
    TimeGrid time;
    Physics physics;
    InitialData init = Example1{};
    double boundary_left = 0.0;
    double boundary_right = 0.0;
    int output_stride = 1;
    Startup startup = Startup::SchemeGhost;

    bool operator==(const SimConfig&) const = default;
};

/// Default storage stride: roughly 300 stored frames per run.
inline int default_output_stride(int steps_m) { return std::max(1, steps_m / 300); }

/// Checks every invariant of the configuration and snaps the Dirichlet
/// values to the endpoints of the evaluated initial displacement.
inline SimConfig validate_config(SimConfig cfg)
{
    auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };

    if (!finite_positive(cfg.grid.length_l))
        throw ConfigError("[grid].l", "string length must be positive");
    if (cfg.grid.cells_n < 2)
        throw ConfigError("[grid].n", "need at least 2 cells");
    if (!finite_positive(cfg.time.horizon_T))
        throw ConfigError("[time].T", "horizon must be positive");
    if (cfg.time.steps_m < 1)
        throw ConfigError("[time].m", "need at least one time step");
    if (!std::isfinite(cfg.physics.alpha) || cfg.physics.alpha < 0.0)
        throw ConfigError("[physics].alpha", "must be >= 0");
    if (!finite_positive(cfg.physics.epsilon))
        throw ConfigError("[physics].epsilon", "must be > 0");
    if (cfg.output_stride < 1)
        throw ConfigError("[output].stride", "must be >= 1");
    if (const auto* m = std::get_if<SingleMode>(&cfg.init)) {
        if (m->mode < 1)
            throw ConfigError("[init].mode", "must be >= 1");
    }

    const InitialValues iv = evaluate_initial(cfg.init, cfg.grid);
    cfg.boundary_left = iv.eta0.front();
    cfg.boundary_right = iv.eta0.back();
    return cfg;
}

// ---------------------------------------------------------------------------
// Dynamical state and stored fields
// ---------------------------------------------------------------------------

/// Two consecutive displacement frames: eta^{i-1} and eta^i.
struct StringState {
    int step_index = 0;
    std::vector<double> eta_prev;
    std::vector<double> eta_curr;

    double velocity(std::size_t j, double dt) const { return (eta_curr[j] - eta_prev[j]) / dt; }
};

/// Dense row-major (time x space) matrix.
struct Field2D {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Field2D() = default;
    Field2D(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    bool empty() const { return data.empty(); }

    void append_row(std::span<const double> values)
    {
        if (cols == 0 && rows == 0)
            cols = values.size();
        if (values.size() != cols)
            throw ContractError("Field2D::append_row: width mismatch");
        data.insert(data.end(), values.begin(), values.end());
        ++rows;
    }
};

/// Strided space-time storage. Row s of every field corresponds to times[s].
/// velocity is the backward difference (eta^i - eta^{i-1})/dt of the solver
/// grid. penalty_force row s is the mean of the step forces acting over
/// (times[s], times[s+1]], so its time integral equals the penalty impulse;
/// with stride 1 it is the force driving the next step. The last row holds
/// the force at the final step.
struct FieldSeries {
    Grid1D grid;
    double dt = 0.0; ///< solver time step (not the storage spacing)
    std::vector<double> times;
    std::vector<int> steps;
    Field2D eta;
    Field2D velocity;
    Field2D penalty_force;

    std::size_t stored() const { return times.size(); }
    bool has_penalty() const { return !penalty_force.empty(); }

    /// Index of the stored frame nearest to t.
    std::size_t nearest(double t) const
    {
        if (times.empty())
            throw ContractError("FieldSeries::nearest: empty series");
        std::size_t best = 0;
        for (std::size_t s = 1; s < times.size(); ++s)
            if (std::abs(times[s] - t) < std::abs(times[best] - t))
                best = s;
        return best;
    }
};

} // namespace obstring
