#pragma once

// Discrete probes of weak-solution properties. Each one evaluates an
// integral identity or inequality against a test function on stored frames.
//
// Quadrature conventions shared by all probes, on stored frames t_0 < ... :
//  - interval s = (t_{s-1}, t_s] carries the velocity w^s = (eta^s - eta^{s-1})/dt_s
//    and is evaluated at its midpoint;
//  - x-derivatives live on cells (x_j, x_{j+1}); eta_x on an interval is the
//    average of the cell gradients of its two end frames;
//  - penalty row s acts over the following interval (t_s, t_{s+1}].
// The viscous terms carry the damping coefficient alpha of the run.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "obstring/core.hpp"
#include "obstring/diagnostics/contact.hpp"
#include "obstring/diagnostics/test_functions.hpp"

namespace obstring {

/// Signed residual plus the sum of absolute values of its terms, so callers
/// can judge it relative to the size of the identity.
struct ProbeValue {
    double value = 0.0;
    double scale = 0.0;

    double relative() const { return scale > 0.0 ? value / scale : 0.0; }
};

namespace detail {

struct IntervalFields {
    double dt = 0.0;
    double t_mid = 0.0;
    std::vector<double> w;      ///< nodal interval velocity
    std::vector<double> dw;     ///< cell gradient of w
    std::vector<double> deta;   ///< cell gradient of eta, end-frame average
    std::vector<double> deta_a; ///< cell gradient at t_{s-1}
    std::vector<double> deta_b; ///< cell gradient at t_s
};

inline IntervalFields interval_fields(const FieldSeries& series, std::size_t s)
{
    IntervalFields f;
    const std::size_t n = series.eta.cols;
    const double dx = series.grid.dx();
    f.dt = series.times[s] - series.times[s - 1];
    f.t_mid = 0.5 * (series.times[s] + series.times[s - 1]);
    const auto a = series.eta.row(s - 1);
    const auto b = series.eta.row(s);
    f.w.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        f.w[j] = (b[j] - a[j]) / f.dt;
    f.dw.resize(n - 1);
    f.deta.resize(n - 1);
    f.deta_a.resize(n - 1);
    f.deta_b.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        f.dw[j] = (f.w[j + 1] - f.w[j]) / dx;
        f.deta_a[j] = (a[j + 1] - a[j]) / dx;
        f.deta_b[j] = (b[j + 1] - b[j]) / dx;
        f.deta[j] = 0.5 * (f.deta_a[j] + f.deta_b[j]);
    }
    return f;
}

inline double cell_mid(const Grid1D& g, std::size_t j) { return g.x(j) + 0.5 * g.dx(); }

inline void require_support(const FieldSeries& series, const BumpTestFunction& phi, const char* who)
{
    const double l = series.grid.length_l;
    const double tol = 1e-12 * std::max(1.0, l);
    if (phi.x_begin() < -tol || phi.x_end() > l + tol)
        throw ContractError(std::string(who) + ": test function must vanish at x = 0 and x = l");
    if (phi.t_end() > series.times.back() * (1.0 + 1e-12))
        throw ContractError(std::string(who) + ": test function must vanish at the final stored time");
    if (!(phi.t_width > 0.0) || !(phi.x_width > 0.0))
        throw ContractError(std::string(who) + ": test function widths must be positive");
}

struct Accum {
    double value = 0.0;
    double scale = 0.0;
    void add(double term)
    {
        value += term;
        scale += std::abs(term);
    }
    ProbeValue result() const { return {value, scale}; }
};

} // namespace detail

// ---------------------------------------------------------------------------
// Weak momentum equation
// ---------------------------------------------------------------------------

/// int int eta_t phi_t - alpha eta_tx phi_x - eta_x phi_x
///     + int v0 phi(0) + int int F phi, which vanishes for a weak solution.
inline ProbeValue weak_momentum_residual(const FieldSeries& series, const BumpTestFunction& phi, double alpha)
{
    detail::require_support(series, phi, "weak_momentum_residual");
    const Grid1D& g = series.grid;
    const double dx = g.dx();
    const std::size_t n = series.eta.cols;

    double a1 = 0.0, a2 = 0.0, a3 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t s = 1; s < series.stored(); ++s) {
        const auto f = detail::interval_fields(series, s);
        if (f.t_mid - 0.5 * f.dt > phi.t_end())
            break;
        for (std::size_t j = 1; j + 1 < n; ++j)
            a1 += f.w[j] * phi.dt(f.t_mid, g.x(j)) * dx * f.dt;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double px = phi.dx(f.t_mid, detail::cell_mid(g, j)) * dx * f.dt;
            a2 += alpha * f.dw[j] * px;
            a3 += f.deta[j] * px;
        }
    }
    const auto v0 = series.velocity.row(0);
    for (std::size_t j = 1; j + 1 < n; ++j)
        b1 += v0[j] * phi(0.0, g.x(j)) * dx;
    if (series.has_penalty())
        for (std::size_t s = 0; s + 1 < series.stored(); ++s) {
            const double h = series.times[s + 1] - series.times[s];
            const auto f = series.penalty_force.row(s);
            for (std::size_t j = 1; j + 1 < n; ++j)
                if (f[j] != 0.0)
                    b2 += f[j] * phi(series.times[s], g.x(j)) * dx * h;
        }

    detail::Accum acc;
    acc.add(a1);
    acc.add(-a2);
    acc.add(-a3);
    acc.add(b1);
    acc.add(b2);
    return acc.result();
}

// ---------------------------------------------------------------------------
// Local energy balance
// ---------------------------------------------------------------------------

/// Left minus right side of the local energy balance with the contact
/// dissipation density F (-v)^+.
inline ProbeValue local_energy_residual(const FieldSeries& series, const BumpTestFunction& phi, double alpha)
{
    detail::require_support(series, phi, "local_energy_residual");
    const Grid1D& g = series.grid;
    const double dx = g.dx();
    const std::size_t n = series.eta.cols;

    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0, t5 = 0.0, t6 = 0.0, r1 = 0.0, r2 = 0.0;
    for (std::size_t s = 1; s < series.stored(); ++s) {
        const auto f = detail::interval_fields(series, s);
        if (f.t_mid - 0.5 * f.dt > phi.t_end())
            break;
        for (std::size_t j = 1; j + 1 < n; ++j)
            t1 += -0.5 * f.w[j] * f.w[j] * phi.dt(f.t_mid, g.x(j)) * dx * f.dt;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double xm = detail::cell_mid(g, j);
            const double w_cell = 0.5 * (f.w[j] + f.w[j + 1]);
            const double grad_sq = 0.5 * (f.deta_a[j] * f.deta_a[j] + f.deta_b[j] * f.deta_b[j]);
            const double weight = dx * f.dt;
            t2 += -0.5 * grad_sq * phi.dt(f.t_mid, xm) * weight;
            t3 += alpha * f.dw[j] * f.dw[j] * phi(f.t_mid, xm) * weight;
            t5 += alpha * f.dw[j] * w_cell * phi.dx(f.t_mid, xm) * weight;
            t6 += f.deta[j] * w_cell * phi.dx(f.t_mid, xm) * weight;
        }
    }
    if (series.has_penalty())
        for (std::size_t s = 0; s + 1 < series.stored(); ++s) {
            const double h = series.times[s + 1] - series.times[s];
            const auto f = series.penalty_force.row(s);
            const auto a = series.eta.row(s);
            const auto b = series.eta.row(s + 1);
            for (std::size_t j = 1; j + 1 < n; ++j)
                if (f[j] != 0.0) {
                    // velocity over the interval the force acts on
                    const double v = (b[j] - a[j]) / h;
                    t4 += f[j] * std::max(0.0, -v) * phi(series.times[s], g.x(j)) * dx * h;
                }
        }
    const auto v0 = series.velocity.row(0);
    const auto e0 = series.eta.row(0);
    for (std::size_t j = 1; j + 1 < n; ++j)
        r1 += 0.5 * v0[j] * v0[j] * phi(0.0, g.x(j)) * dx;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double d = (e0[j + 1] - e0[j]) / dx;
        r2 += 0.5 * d * d * phi(0.0, detail::cell_mid(g, j)) * dx;
    }

    detail::Accum acc;
    for (double term : {t1, t2, t3, t4, t5, t6})
        acc.add(term);
    acc.add(-r1);
    acc.add(-r2);
    return acc.result();
}

// ---------------------------------------------------------------------------
// Renormalized inequality for (eta_t)^+
// ---------------------------------------------------------------------------

enum class Renormalization { Square };

/// Slack LHS - RHS of the renormalized momentum inequality with b(x) = x^2;
/// non-negative (up to discretization error) for a weak solution.
///
/// The quadrature follows the implicit time level of the scheme: step
/// t_i -> t_{i+1} is weighted by phi(t_i), and its spatial terms use eta and
/// the velocity at t_{i+1}. The velocity before the first stored interval is
/// the stored initial velocity. With this pairing the discrete chain rule
/// errs on the side of the inequality instead of against it.
inline ProbeValue renormalized_residual(const FieldSeries& series, const BumpTestFunction& phi, double alpha,
                                        Renormalization kind = Renormalization::Square)
{
    (void)kind;
    detail::require_support(series, phi, "renormalized_residual");
    if (phi.amplitude < 0.0)
        throw ContractError("renormalized_residual: test function must be non-negative");
    // The slack is nonnegative per solver step by convexity of b; pairing
    // frames several steps apart loses that, so strided storage is refused.
    for (std::size_t s = 1; s < series.stored(); ++s)
        if (series.steps[s] - series.steps[s - 1] != 1)
            throw ContractError("renormalized_residual: needs every solver step stored (output stride 1)");
    const Grid1D& g = series.grid;
    const double dx = g.dx();
    const std::size_t n = series.eta.cols;
    auto b = [](double x) { return x * x; };
    auto b1 = [](double x) { return 2.0 * x; };
    constexpr double b2 = 2.0;

    double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0, r5 = 0.0, rhs = 0.0;
    std::vector<double> ph(n), ph_next(n), w(n), p(n);
    for (std::size_t j = 0; j < n; ++j)
        ph[j] = phi(series.times[0], g.x(j));
    for (std::size_t i = 0; i + 1 < series.stored(); ++i) {
        const double t = series.times[i];
        const double h = series.times[i + 1] - t;
        for (std::size_t j = 0; j < n; ++j)
            ph_next[j] = phi(series.times[i + 1], g.x(j));
        if (t > phi.t_end())
            break;
        const auto e0 = series.eta.row(i);
        const auto e1 = series.eta.row(i + 1);
        for (std::size_t j = 0; j < n; ++j) {
            w[j] = (e1[j] - e0[j]) / h;
            p[j] = std::max(0.0, w[j]);
        }
        for (std::size_t j = 1; j + 1 < n; ++j)
            r1 += b(p[j]) * (ph_next[j] - ph[j]) * dx;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double weight = dx * h;
            const double dw = (w[j + 1] - w[j]) / dx;
            const double dp = (p[j + 1] - p[j]) / dx;
            const double deta = (e1[j + 1] - e1[j]) / dx;
            const double b1_cell = 0.5 * (b1(p[j]) + b1(p[j + 1]));
            const double ph_cell = 0.5 * (ph[j] + ph[j + 1]);
            const double phx = (ph[j + 1] - ph[j]) / dx;
            r2 += -alpha * dw * b1_cell * phx * weight;
            r3 += -alpha * dp * dp * b2 * ph_cell * weight;
            r4 += -deta * b1_cell * phx * weight;
            r5 += -deta * b2 * dp * ph_cell * weight;
        }
        ph.swap(ph_next);
    }
    const auto v0 = series.velocity.row(0);
    for (std::size_t j = 1; j + 1 < n; ++j)
        rhs += -b(std::max(0.0, v0[j])) * phi(series.times[0], g.x(j)) * dx;

    detail::Accum acc;
    for (double term : {r1, r2, r3, r4, r5})
        acc.add(term);
    acc.add(-rhs);
    return acc.result();
}

// ---------------------------------------------------------------------------
// Stress jump across a contact boundary graph
// ---------------------------------------------------------------------------

struct StressJump {
    double jump = 0.0;
    double penalty_mass = 0.0;
    double side_scale = 0.0; ///< (1/delta) int |one-sided stress integrals| dt
};

namespace detail {

/// Integral over [lo, hi] of a cell-wise constant function.
inline double cell_integral(const std::vector<double>& cells, const Grid1D& g, double lo, double hi)
{
    const double dx = g.dx();
    double acc = 0.0;
    const long first = std::max(0L, static_cast<long>(std::floor(lo / dx)));
    const long last = std::min(static_cast<long>(cells.size()) - 1, static_cast<long>(std::floor(hi / dx)));
    for (long c = first; c <= last; ++c) {
        const double a = std::max(lo, c * dx);
        const double b = std::min(hi, (c + 1) * dx);
        if (b > a)
            acc += cells[c] * (b - a);
    }
    return acc;
}

} // namespace detail

/// -(1/delta) int_a^b [ int_f^{f+delta} sigma - int_{f-delta}^f sigma ] dt with
/// sigma = eta_x + alpha eta_tx, and the penalty impulse inside the
/// delta-tube around the graph.
inline StressJump stress_jump_probe(const FieldSeries& series, const Polyline& graph, double delta, double alpha)
{
    const Grid1D& g = series.grid;
    const double dx = g.dx();
    if (graph.size() < 2)
        throw ContractError("stress_jump_probe: graph needs at least two points");
    if (delta < 2.0 * dx * (1.0 - 1e-12))
        throw ContractError("stress_jump_probe: delta must be >= 2 dx");
    for (double x : graph.x)
        if (x - delta < 0.0 || x + delta > g.length_l)
            throw ContractError("stress_jump_probe: delta-tube leaves the domain");

    StressJump out;
    const double a = graph.t_begin();
    const double b = graph.t_end();
    std::vector<double> sigma(series.eta.cols - 1);
    for (std::size_t s = 1; s < series.stored(); ++s) {
        const auto f = detail::interval_fields(series, s);
        if (f.t_mid < a || f.t_mid > b)
            continue;
        for (std::size_t j = 0; j < sigma.size(); ++j)
            sigma[j] = f.deta[j] + alpha * f.dw[j];
        const double x = graph.at(f.t_mid);
        const double right = detail::cell_integral(sigma, g, x, x + delta);
        const double left = detail::cell_integral(sigma, g, x - delta, x);
        out.jump += -(right - left) / delta * f.dt;
        out.side_scale += (std::abs(right) + std::abs(left)) / delta * f.dt;
    }
    if (series.has_penalty())
        for (std::size_t s = 0; s + 1 < series.stored(); ++s) {
            const double t = series.times[s];
            if (t < a || t >= b)
                continue;
            const double h = series.times[s + 1] - t;
            const double x = graph.at(t);
            const auto f = series.penalty_force.row(s);
            for (std::size_t j = 1; j + 1 < series.eta.cols; ++j)
                if (std::abs(g.x(j) - x) <= delta)
                    out.penalty_mass += f[j] * dx * h;
        }
    return out;
}

/// Linear extrapolation to delta -> 0 from tubes of width delta and 2 delta.
/// Smooth stress contributes O(delta) to the one-sided difference and a
/// diffuse penalty contributes O(delta) to the tube mass; both cancel here,
/// while a force concentrated on the graph survives.
inline StressJump stress_jump_limit(const FieldSeries& series, const Polyline& graph, double delta, double alpha)
{
    const StressJump a = stress_jump_probe(series, graph, delta, alpha);
    const StressJump b = stress_jump_probe(series, graph, 2.0 * delta, alpha);
    return {2.0 * a.jump - b.jump, 2.0 * a.penalty_mass - b.penalty_mass, a.side_scale};
}

// ---------------------------------------------------------------------------
// Velocity jump across a horizontal contact segment
// ---------------------------------------------------------------------------

struct VelocityJump {
    double delta = 0.0;
    double post_one = 0.0; ///< (1/delta) int_{t1}^{t1+delta} int_{x0}^{x1} eta_t
    double pre_one = 0.0;  ///< (1/delta) int_{t1-delta}^{t1} int_{x0}^{x1} eta_t
    double post_phi = 0.0;
    double pre_phi = 0.0;

    double jump_one() const { return post_one - pre_one; }
    double jump_phi() const { return post_phi - pre_phi; }
};

namespace detail {

/// eta at time t, linear in time between stored frames.
inline std::vector<double> eta_at(const FieldSeries& series, double t)
{
    const auto& ts = series.times;
    if (t < ts.front() - 1e-12 || t > ts.back() + 1e-12)
        throw ContractError("velocity_jump_probe: time window outside the stored range");
    std::size_t k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    if (k == 0)
        k = 1;
    if (k >= ts.size())
        k = ts.size() - 1;
    const double w = std::clamp((t - ts[k - 1]) / (ts[k] - ts[k - 1]), 0.0, 1.0);
    const auto a = series.eta.row(k - 1);
    const auto b = series.eta.row(k);
    std::vector<double> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j)
        out[j] = (1.0 - w) * a[j] + w * b[j];
    return out;
}

/// int_{x0}^{x1} u(x) phi(x) dx, u piecewise linear on the grid, 2-point
/// Gauss on each (partial) cell.
template <class Weight>
double segment_integral(const std::vector<double>& u, const Grid1D& g, double x0, double x1, const Weight& phi)
{
    const double dx = g.dx();
    const double gp = 0.5 / std::sqrt(3.0);
    double acc = 0.0;
    const long first = std::max(0L, static_cast<long>(std::floor(x0 / dx)));
    const long last = std::min(static_cast<long>(u.size()) - 2, static_cast<long>(std::floor(x1 / dx)));
    for (long c = first; c <= last; ++c) {
        const double a = std::max(x0, c * dx);
        const double b = std::min(x1, (c + 1) * dx);
        if (b <= a)
            continue;
        for (double off : {-gp, gp}) {
            const double x = 0.5 * (a + b) + off * (b - a);
            const double w = (x - c * dx) / dx;
            const double val = (1.0 - w) * u[c] + w * u[c + 1];
            acc += 0.5 * (b - a) * val * phi(x);
        }
    }
    return acc;
}

} // namespace detail

/// Post- and pre-contact time averages of the velocity over [x0, x1] for
/// each delta. Exact in time: int eta_t dt = eta(t1 + delta) - eta(t1).
inline std::vector<VelocityJump> velocity_jump_probe(const FieldSeries& series, double t1, double x0, double x1,
                                                     const std::vector<double>& deltas,
                                                     const SpatialWeight& phi = {})
{
    const Grid1D& g = series.grid;
    if (!(x0 >= 0.0 && x1 <= g.length_l && x0 < x1))
        throw ContractError("velocity_jump_probe: [x0, x1] must lie inside the domain");
    if (deltas.empty())
        throw ContractError("velocity_jump_probe: no deltas");
    const double dmax = *std::max_element(deltas.begin(), deltas.end());
    if (t1 - dmax < series.times.front() - 1e-12 || t1 + dmax > series.times.back() + 1e-12)
        throw ContractError("velocity_jump_probe: time window outside the stored range");

    const SpatialWeight one{1.0, 0.0, 0.0};
    const std::vector<double> at = detail::eta_at(series, t1);
    std::vector<VelocityJump> out;
    for (double d : deltas) {
        if (!(d > 0.0))
            throw ContractError("velocity_jump_probe: deltas must be positive");
        const std::vector<double> after = detail::eta_at(series, t1 + d);
        const std::vector<double> before = detail::eta_at(series, t1 - d);
        std::vector<double> up(at.size()), down(at.size());
        for (std::size_t j = 0; j < at.size(); ++j) {
            up[j] = (after[j] - at[j]) / d;
            down[j] = (at[j] - before[j]) / d;
        }
        VelocityJump r;
        r.delta = d;
        r.post_one = detail::segment_integral(up, g, x0, x1, one);
        r.pre_one = detail::segment_integral(down, g, x0, x1, one);
        r.post_phi = detail::segment_integral(up, g, x0, x1, phi);
        r.pre_phi = detail::segment_integral(down, g, x0, x1, phi);
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Zero trace of the velocity on a monotone graph
// ---------------------------------------------------------------------------

/// int_a^b int_{f(t)}^{l} (eta_tx phi + eta_t phi_x) dx dt. Integration by
/// parts turns this into -int eta_t(t, f(t)) phi(t, f(t)) dt, so it vanishes
/// when the velocity has zero trace on the graph.
inline ProbeValue zero_trace_residual(const FieldSeries& series, const Polyline& graph, const BumpTestFunction& phi)
{
    if (graph.size() < 2)
        throw ContractError("zero_trace_residual: graph needs at least two points");
    if (!graph.monotone())
        throw ContractError("zero_trace_residual: graph must be monotone in t");
    const Grid1D& g = series.grid;
    const double l = g.length_l;
    const double dx = g.dx();
    const double gp = 0.5 / std::sqrt(3.0);

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t s = 1; s < series.stored(); ++s) {
        const auto f = detail::interval_fields(series, s);
        if (f.t_mid < graph.t_begin() || f.t_mid > graph.t_end())
            continue;
        const double xf = std::clamp(graph.at(f.t_mid), 0.0, l);
        const long first = static_cast<long>(std::floor(xf / dx));
        for (long c = std::max(0L, first); c < static_cast<long>(f.dw.size()); ++c) {
            const double a = std::max(xf, c * dx);
            const double b = (c + 1) * dx;
            if (b <= a)
                continue;
            for (double off : {-gp, gp}) {
                const double x = 0.5 * (a + b) + off * (b - a);
                const double w = (x - c * dx) / dx;
                const double vel = (1.0 - w) * f.w[c] + w * f.w[c + 1];
                const double weight = 0.5 * (b - a) * f.dt;
                lhs += f.dw[c] * phi(f.t_mid, x) * weight;
                rhs += vel * phi.dx(f.t_mid, x) * weight;
            }
        }
    }
    detail::Accum acc;
    acc.add(lhs);
    acc.add(rhs);
    return acc.result();
}

/// -int v(t, f(t)) phi(t, f(t)) dt, the boundary term zero_trace_residual
/// reduces to by integration by parts.
inline double zero_trace_boundary_term(const FieldSeries& series, const Polyline& graph, const BumpTestFunction& phi)
{
    const Grid1D& g = series.grid;
    const double dx = g.dx();
    double acc = 0.0;
    for (std::size_t s = 1; s < series.stored(); ++s) {
        const auto f = detail::interval_fields(series, s);
        if (f.t_mid < graph.t_begin() || f.t_mid > graph.t_end())
            continue;
        const double xf = std::clamp(graph.at(f.t_mid), 0.0, g.length_l);
        const std::size_t c = std::min(static_cast<std::size_t>(xf / dx), f.w.size() - 2);
        const double w = (xf - c * dx) / dx;
        const double vel = (1.0 - w) * f.w[c] + w * f.w[c + 1];
        acc += -vel * phi(f.t_mid, xf) * f.dt;
    }
    return acc;
}

} // namespace obstring
