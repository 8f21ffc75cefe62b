#pragma once

// Sine-mode Galerkin solver for the regularized obstacle problem
//
//   eta_tt - alpha eta_txx - eta_xx
//       + (1/eps) chi_eps(eta) chi_delta(eta_t) eta_t = 0,
//
// eta(t, x) = h + sum_k q_k(t) sin(k pi x / l). Each mode obeys
// q_k'' + alpha lambda_k q_k' + lambda_k q_k = f_k with lambda_k = (k pi/l)^2
// and f_k the sine projection of the smoothed penalty. Used as an independent
// check on the finite-difference scheme; it is not meant to be fast.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "obstring/core.hpp"

namespace obstring {

/// Smooth non-increasing cutoff: 1 for x <= -a, 0 for x >= 0, quintic C^2
/// transition in between.
struct SmoothCutoff {
    double a = 1.0;

    double operator()(double x) const
    {
        if (x >= 0.0)
            return 0.0;
        if (x <= -a)
            return 1.0;
        const double s = -x / a;
        return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    }
};

inline double cutoff_eval(const SmoothCutoff& c, double x) { return c(x); }

struct ModalState {
    int n_modes = 0;
    std::vector<double> q;
    std::vector<double> qdot;
    double offset_h = 0.0;
    double length_l = 1.0;

    double eta(double x) const
    {
        double acc = offset_h;
        for (int k = 0; k < n_modes; ++k)
            acc += q[k] * std::sin((k + 1) * std::numbers::pi * x / length_l);
        return acc;
    }

    double velocity(double x) const
    {
        double acc = 0.0;
        for (int k = 0; k < n_modes; ++k)
            acc += qdot[k] * std::sin((k + 1) * std::numbers::pi * x / length_l);
        return acc;
    }

    /// 1/2 sum (qdot_k^2 + lambda_k q_k^2) l/2, the continuous kinetic plus
    /// elastic energy of the reconstruction.
    double energy() const
    {
        double acc = 0.0;
        for (int k = 0; k < n_modes; ++k) {
            const double lam = std::pow((k + 1) * std::numbers::pi / length_l, 2);
            acc += qdot[k] * qdot[k] + lam * q[k] * q[k];
        }
        return 0.5 * acc * 0.5 * length_l;
    }
};

/// Sine table on composite-midpoint quadrature nodes plus the modal
/// right-hand side.
class ModalSystem {
public:
    ModalSystem(double length_l, int n_modes, int quad_nodes, const Physics& physics, SmoothCutoff cutoff_eta,
                SmoothCutoff cutoff_vel)
        : length_l_(length_l), n_(n_modes), quad_(quad_nodes), physics_(physics), cut_eta_(cutoff_eta),
          cut_vel_(cutoff_vel), lambda_(n_modes), sines_(static_cast<std::size_t>(n_modes) * quad_nodes)
    {
        if (n_modes < 1)
            throw ConfigError("[solver].galerkin_modes", "need at least one mode");
        if (quad_nodes < 4 * n_modes)
            throw ContractError("ModalSystem: quad_nodes must be >= 4 n_modes");
        if (!(cutoff_eta.a > 0.0) || !(cutoff_vel.a > 0.0))
            throw ContractError("ModalSystem: cutoff widths must be > 0");
        for (int k = 0; k < n_; ++k) {
            lambda_[k] = std::pow((k + 1) * std::numbers::pi / length_l_, 2);
            for (int m = 0; m < quad_; ++m)
                sines_[static_cast<std::size_t>(k) * quad_ + m] =
                    std::sin((k + 1) * std::numbers::pi * quad_x(m) / length_l_);
        }
    }

    /// Cutoff widths epsilon (displacement) and delta_vel (velocity).
    ModalSystem(double length_l, int n_modes, int quad_nodes, const Physics& physics, double delta_vel)
        : ModalSystem(length_l, n_modes, quad_nodes, physics, SmoothCutoff{physics.epsilon}, SmoothCutoff{delta_vel})
    {
    }

    int modes() const { return n_; }
    int quad_nodes() const { return quad_; }
    double lambda(int k) const { return lambda_[k]; }
    double quad_x(int m) const { return (m + 0.5) * length_l_ / quad_; }
    double sine(int k, int m) const { return sines_[static_cast<std::size_t>(k) * quad_ + m]; }

    /// Values of sum_k c_k sin(k pi x_m / l) at all quadrature nodes.
    std::vector<double> synthesize(const std::vector<double>& coeffs) const
    {
        std::vector<double> out(quad_, 0.0);
        for (int k = 0; k < n_; ++k) {
            const double c = coeffs[k];
            if (c == 0.0)
                continue;
            const double* row = &sines_[static_cast<std::size_t>(k) * quad_];
            for (int m = 0; m < quad_; ++m)
                out[m] += c * row[m];
        }
        return out;
    }

    /// (2/l) * midpoint quadrature of g sin(k pi x/l), k = 1..n.
    std::vector<double> project(const std::vector<double>& values) const
    {
        std::vector<double> out(n_, 0.0);
        const double w = 2.0 / quad_;
        for (int k = 0; k < n_; ++k) {
            const double* row = &sines_[static_cast<std::size_t>(k) * quad_];
            double acc = 0.0;
            for (int m = 0; m < quad_; ++m)
                acc += values[m] * row[m];
            out[k] = w * acc;
        }
        return out;
    }

    /// Smoothed penalty density (1/eps) chi_eps(eta) chi_delta(v) (-v) >= 0.
    double penalty_density(double eta, double v) const
    {
        return -cut_eta_(eta) * cut_vel_(v) * v / physics_.epsilon;
    }

    /// Projected penalty force f_k; zero when eta > 0 can be certified from
    /// the coefficients alone.
    std::vector<double> penalty_modes(const ModalState& s) const
    {
        double bound = 0.0;
        for (double c : s.q)
            bound += std::abs(c);
        if (s.offset_h - bound > 0.0)
            return std::vector<double>(n_, 0.0);

        const std::vector<double> eta = synthesize(s.q);
        const std::vector<double> vel = synthesize(s.qdot);
        std::vector<double> g(quad_);
        bool active = false;
        for (int m = 0; m < quad_; ++m) {
            g[m] = penalty_density(s.offset_h + eta[m], vel[m]);
            active = active || g[m] != 0.0;
        }
        if (!active)
            return std::vector<double>(n_, 0.0);
        return project(g);
    }

    void rhs(const ModalState& s, std::vector<double>& dq, std::vector<double>& dqdot) const
    {
        const std::vector<double> f = penalty_modes(s);
        dq = s.qdot;
        dqdot.resize(n_);
        for (int k = 0; k < n_; ++k)
            dqdot[k] = -physics_.alpha * lambda_[k] * s.qdot[k] - lambda_[k] * s.q[k] + f[k];
    }

private:
    double length_l_;
    int n_;
    int quad_;
    Physics physics_;
    SmoothCutoff cut_eta_;
    SmoothCutoff cut_vel_;
    std::vector<double> lambda_;
    std::vector<double> sines_;
};

struct ModalRhs {
    std::vector<double> dq;
    std::vector<double> dqdot;
};

inline ModalRhs modal_rhs(const ModalState& state, const Physics& physics, const SmoothCutoff& cutoff_eta,
                          const SmoothCutoff& cutoff_vel, int quad_nodes)
{
    const ModalSystem sys(state.length_l, state.n_modes, quad_nodes, physics, cutoff_eta, cutoff_vel);
    ModalRhs out;
    sys.rhs(state, out.dq, out.dqdot);
    return out;
}

struct GalerkinOptions {
    int n_modes = 32;
    int quad_nodes = 0;     ///< 0 selects 8 n_modes
    double delta_vel = 0.0; ///< 0 selects 1/n_modes
    int output_stride = 1;  ///< in units of the sampling time grid
};

/// Projects closed-form (or tabulated) initial data onto the sine modes.
inline ModalState project_initial(const InitialData& init, double length_l, const ModalSystem& sys)
{
    const double h = initial_at(init, 0.0, length_l).first;
    const double h_right = initial_at(init, length_l, length_l).first;
    if (std::abs(h - h_right) > 1e-12 * std::max(1.0, std::abs(h)))
        throw ConfigError("[init]", "galerkin oracle requires equal endpoint displacements");

    std::vector<double> eta(sys.quad_nodes());
    std::vector<double> vel(sys.quad_nodes());
    for (int m = 0; m < sys.quad_nodes(); ++m) {
        const auto [e, v] = initial_at(init, sys.quad_x(m), length_l);
        eta[m] = e - h;
        vel[m] = v;
    }
    ModalState s;
    s.n_modes = sys.modes();
    s.q = sys.project(eta);
    s.qdot = sys.project(vel);
    s.offset_h = h;
    s.length_l = length_l;
    return s;
}

namespace detail {

inline void rk4_step(const ModalSystem& sys, ModalState& s, double h)
{
    const std::size_t n = s.q.size();
    ModalState tmp = s;
    std::vector<double> k1q, k1v, k2q, k2v, k3q, k3v, k4q, k4v;

    sys.rhs(s, k1q, k1v);
    for (std::size_t k = 0; k < n; ++k) {
        tmp.q[k] = s.q[k] + 0.5 * h * k1q[k];
        tmp.qdot[k] = s.qdot[k] + 0.5 * h * k1v[k];
    }
    sys.rhs(tmp, k2q, k2v);
    for (std::size_t k = 0; k < n; ++k) {
        tmp.q[k] = s.q[k] + 0.5 * h * k2q[k];
        tmp.qdot[k] = s.qdot[k] + 0.5 * h * k2v[k];
    }
    sys.rhs(tmp, k3q, k3v);
    for (std::size_t k = 0; k < n; ++k) {
        tmp.q[k] = s.q[k] + h * k3q[k];
        tmp.qdot[k] = s.qdot[k] + h * k3v[k];
    }
    sys.rhs(tmp, k4q, k4v);
    for (std::size_t k = 0; k < n; ++k) {
        s.q[k] += h / 6.0 * (k1q[k] + 2.0 * k2q[k] + 2.0 * k3q[k] + k4q[k]);
        s.qdot[k] += h / 6.0 * (k1v[k] + 2.0 * k2v[k] + 2.0 * k3v[k] + k4v[k]);
    }
}

inline void sample_frame(FieldSeries& out, const ModalState& s, const ModalSystem& sys, const Grid1D& grid,
                         const std::vector<std::vector<double>>& table, double t, int step)
{
    const std::size_t nodes = grid.nodes();
    std::vector<double> eta(nodes, s.offset_h), vel(nodes, 0.0), pen(nodes, 0.0);
    for (int k = 0; k < s.n_modes; ++k) {
        const auto& row = table[k];
        for (std::size_t j = 0; j < nodes; ++j) {
            eta[j] += s.q[k] * row[j];
            vel[j] += s.qdot[k] * row[j];
        }
    }
    eta.front() = eta.back() = s.offset_h;
    vel.front() = vel.back() = 0.0;
    for (std::size_t j = 1; j + 1 < nodes; ++j)
        pen[j] = sys.penalty_density(eta[j], vel[j]);
    out.times.push_back(t);
    out.steps.push_back(step);
    out.eta.append_row(eta);
    out.velocity.append_row(vel);
    out.penalty_force.append_row(pen);
}

} // namespace detail

/// Largest RK4 substep the oracle takes: min(dt, eps/10, 0.1/lambda_max).
inline double galerkin_substep_cap(double dt, const Physics& physics, double lambda_max)
{
    return std::min({dt, physics.epsilon / 10.0, 0.1 / lambda_max});
}

/// Classical RK4 on the modal system; fields sampled on `grid` at the times
/// of `time` (every output_stride steps plus the last one).
inline FieldSeries integrate(const InitialData& init, const Grid1D& grid, const TimeGrid& time,
                             const Physics& physics, const GalerkinOptions& opts = {})
{
    const int n = opts.n_modes;
    if (n < 1)
        throw ConfigError("[solver].galerkin_modes", "need at least one mode");
    const int quad = opts.quad_nodes > 0 ? opts.quad_nodes : 8 * n;
    const double delta_vel = opts.delta_vel > 0.0 ? opts.delta_vel : 1.0 / n;
    const ModalSystem sys(grid.length_l, n, quad, physics, delta_vel);

    ModalState state = project_initial(init, grid.length_l, sys);

    const double dt = time.dt();
    const double cap = galerkin_substep_cap(dt, physics, sys.lambda(n - 1));
    const int substeps = static_cast<int>(std::ceil(dt / cap - 1e-12));
    const double h = dt / substeps;

    std::vector<std::vector<double>> table(n, std::vector<double>(grid.nodes()));
    for (int k = 0; k < n; ++k)
        for (std::size_t j = 0; j < grid.nodes(); ++j)
            table[k][j] = std::sin((k + 1) * std::numbers::pi * grid.x(j) / grid.length_l);

    FieldSeries out;
    out.grid = grid;
    out.dt = dt;
    detail::sample_frame(out, state, sys, grid, table, 0.0, 0);

    const int stride = std::max(1, opts.output_stride);
    for (int i = 1; i <= time.steps_m; ++i) {
        for (int sub = 0; sub < substeps; ++sub)
            detail::rk4_step(sys, state, h);
        for (int k = 0; k < n; ++k)
            if (!std::isfinite(state.q[k]) || !std::isfinite(state.qdot[k]))
                throw NumericError("non-finite modal amplitude at step " + std::to_string(i), i);
        if (i % stride == 0 || i == time.steps_m)
            detail::sample_frame(out, state, sys, grid, table, time.t(i), i);
    }
    return out;
}

/// Closed-form solution of q'' + alpha lambda q' + lambda q = 0 with
/// q(0) = q0, q'(0) = qdot0. Returns (q(t), q'(t)).
inline std::pair<double, double> damped_mode_exact(double lambda, double alpha, double q0, double qdot0, double t)
{
    using cplx = std::complex<double>;
    const double b = alpha * lambda;
    const double disc = b * b - 4.0 * lambda;
    if (std::abs(disc) <= 1e-12 * b * b) {
        const double r = -0.5 * b;
        const double c2 = qdot0 - r * q0;
        const double e = std::exp(r * t);
        return {(q0 + c2 * t) * e, (c2 + r * (q0 + c2 * t)) * e};
    }
    const cplx sq = std::sqrt(cplx(disc, 0.0));
    const cplx r1 = 0.5 * (-b + sq);
    const cplx r2 = 0.5 * (-b - sq);
    const cplx c1 = (cplx(qdot0) - r2 * q0) / (r1 - r2);
    const cplx c2 = cplx(q0) - c1;
    const cplx e1 = std::exp(r1 * t);
    const cplx e2 = std::exp(r2 * t);
    return {(c1 * e1 + c2 * e2).real(), (c1 * r1 * e1 + c2 * r2 * e2).real()};
}

} // namespace obstring
