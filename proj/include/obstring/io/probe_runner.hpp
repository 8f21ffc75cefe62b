#pragma once

// Evaluates the configured probes on a stored run and turns each into a
// pass/fail verdict with a one-line summary.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "obstring/diagnostics/contact.hpp"
#include "obstring/diagnostics/energy.hpp"
#include "obstring/diagnostics/mollifier.hpp"
#include "obstring/diagnostics/probes.hpp"
#include "obstring/diagnostics/test_functions.hpp"
#include "obstring/io/config.hpp"

namespace obstring::io {

struct ProbeOutcome {
    std::string name;
    bool passed = true;
    bool contract_violation = false; ///< precondition failure rather than a tolerance miss
    std::string summary;
};

namespace detail {

inline std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
    return buf;
}

} // namespace detail

/// Longest monotone left-edge graph with at least 20 points whose tube of
/// width 2 delta stays inside the domain. The choice does not look at the
/// probe result.
inline std::optional<Polyline> select_left_boundary(const ContactReport& rep, const Grid1D& grid, double delta)
{
    std::optional<Polyline> best;
    for (const auto& g : rep.boundary_graphs) {
        if (!g.left_edge || g.size() < 20 || !g.monotone())
            continue;
        const auto [lo, hi] = std::minmax_element(g.x.begin(), g.x.end());
        if (*lo - 2.0 * delta < 0.0 || *hi + 2.0 * delta > grid.length_l)
            continue;
        if (!best || g.t_end() - g.t_begin() > best->t_end() - best->t_begin())
            best = g;
    }
    return best;
}

/// First stored frame at which every node of [x0, x1] is in contact.
inline std::optional<std::size_t> segment_contact_frame(const ContactReport& rep, const Grid1D& grid, double x0,
                                                        double x1)
{
    const double dx = grid.dx();
    const auto j0 = static_cast<std::size_t>(std::ceil(x0 / dx - 1e-9));
    const auto j1 = static_cast<std::size_t>(std::floor(x1 / dx + 1e-9));
    for (std::size_t s = 0; s < rep.rows; ++s) {
        bool all = j0 <= j1;
        for (std::size_t j = j0; j <= j1 && all; ++j)
            all = rep.in_contact(s, j);
        if (all)
            return s;
    }
    return std::nullopt;
}

struct StressJumpVerdict {
    StressJump limit;
    double floor = 0.0;    ///< absolute tolerance, 1% of the one-sided stress level
    bool vacuous = false;  ///< no penalty mass on the graph, so agreement says nothing
    bool passed = false;
};

/// Agreement counts only where the penalty acts on the graph; a lift-off
/// boundary where both sides vanish is reported as vacuous and fails.
inline StressJumpVerdict judge_stress_jump(const StressJump& lim, double tol_rel)
{
    StressJumpVerdict v;
    v.limit = lim;
    v.floor = 1e-2 * lim.side_scale;
    v.vacuous = lim.penalty_mass <= v.floor;
    const double big = std::max(std::abs(lim.jump), std::abs(lim.penalty_mass));
    v.passed = !v.vacuous && lim.jump >= -v.floor && std::abs(lim.jump - lim.penalty_mass) <= tol_rel * big + v.floor;
    return v;
}

struct VelocityJumpVerdict {
    std::vector<VelocityJump> rows;
    bool monotone = false;
    double final_ratio = 0.0;
    bool passed = false;
};

/// Deltas are expected in decreasing order; post-contact magnitudes must not
/// grow along that order and the last one must be small next to the
/// pre-contact average at the same delta.
inline VelocityJumpVerdict judge_velocity_jump(const std::vector<VelocityJump>& rows, double tol)
{
    VelocityJumpVerdict v;
    v.rows = rows;
    v.monotone = true;
    for (std::size_t k = 1; k < rows.size(); ++k)
        v.monotone = v.monotone && std::abs(rows[k].post_one) <= std::abs(rows[k - 1].post_one);
    const auto& last = rows.back();
    v.final_ratio = std::abs(last.pre_one) > 0.0 ? std::abs(last.post_one) / std::abs(last.pre_one) : INFINITY;
    v.passed = v.monotone && v.final_ratio <= tol;
    return v;
}

struct DissipationVerdict {
    std::vector<double> omegas;
    std::vector<double> negative_fraction;
    std::vector<double> totals;
    bool passed = false;
};

/// Spacing of the stored frames, which is the solver step times the stride.
inline double frame_spacing(const FieldSeries& series)
{
    return series.stored() > 1 ? series.dt * (series.steps[1] - series.steps[0]) : series.dt;
}

/// Widths are multiples of the coarser of dx and the frame spacing, sorted
/// decreasing; the negative-mass fraction must not grow.
inline DissipationVerdict judge_dissipation(const FieldSeries& series, std::vector<double> omega_units)
{
    std::sort(omega_units.begin(), omega_units.end(), std::greater<>());
    DissipationVerdict v;
    const double unit = std::max(series.grid.dx(), frame_spacing(series));
    for (double w : omega_units) {
        const auto est = dissipation_estimate(series, MollifierKernel{w * unit});
        v.omegas.push_back(w * unit);
        v.negative_fraction.push_back(est.negative_fraction);
        v.totals.push_back(est.total);
    }
    v.passed = true;
    for (std::size_t k = 1; k < v.negative_fraction.size(); ++k)
        v.passed = v.passed && v.negative_fraction[k] <= v.negative_fraction[k - 1];
    return v;
}

/// Runs every enabled probe. `ledger` may be empty when energy.csv is absent.
inline std::vector<ProbeOutcome> run_probes(const FieldSeries& series, const EnergyLedger& ledger,
                                            const RunConfig& cfg, const std::vector<std::string>& only = {})
{
    const ProbeSettings& ps = cfg.probes;
    const std::vector<std::string>& names = only.empty() ? ps.enabled : only;
    const double alpha = cfg.sim.physics.alpha;
    const double T = series.times.back();
    const double l = series.grid.length_l;
    const double dx = series.grid.dx();

    std::vector<ProbeOutcome> out;
    std::optional<ContactReport> contact;
    auto get_contact = [&]() -> const ContactReport& {
        if (!contact)
            contact = extract_contact(series);
        return *contact;
    };

    for (const auto& name : names) {
        ProbeOutcome o;
        o.name = name;
        try {
            if (name == "energy") {
                if (ledger.empty())
                    throw ContractError("energy: no ledger available");
                const auto mono = check_energy_monotone(ledger, ps.tol_energy);
                const double work = ledger.rows.back().contact_work_cum;
                o.passed = mono.violations == 0 && work <= 0.0;
                o.summary = detail::format("violations=%g worst_increase=%.3e contact_work=%.6g", static_cast<double>(mono.violations),
                                           mono.worst_increase, work);
            } else if (name == "weak_momentum" || name == "local_energy" || name == "renormalized") {
                double worst = 0.0;
                double worst_signed = INFINITY;
                for (const auto& phi : builtin_test_functions(l, T)) {
                    ProbeValue v;
                    if (name == "weak_momentum")
                        v = weak_momentum_residual(series, phi, alpha);
                    else if (name == "local_energy")
                        v = local_energy_residual(series, phi, alpha);
                    else
                        v = renormalized_residual(series, phi, alpha);
                    worst = std::max(worst, std::abs(v.relative()));
                    worst_signed = std::min(worst_signed, v.relative());
                }
                if (name == "renormalized") {
                    o.passed = worst_signed >= -ps.tol_renorm;
                    o.summary = detail::format("min slack/scale=%.3e (tolerance -%.1e)", worst_signed, ps.tol_renorm);
                } else {
                    o.summary = detail::format("max |residual|/scale=%.3e over 15 test functions", worst);
                }
            } else if (name == "dissipation") {
                const auto v = judge_dissipation(series, ps.omega_dx);
                o.passed = v.passed;
                std::string s = "negative fraction by omega:";
                for (std::size_t k = 0; k < v.omegas.size(); ++k)
                    s += detail::format(" %.3g->%.3e", v.omegas[k], v.negative_fraction[k]);
                o.summary = s;
            } else if (name == "stress_jump") {
                const double delta = ps.stress_delta_dx * dx;
                const auto graph = select_left_boundary(get_contact(), series.grid, delta);
                if (!graph)
                    throw ContractError("stress_jump: no resolved left contact-boundary graph");
                const auto v = judge_stress_jump(stress_jump_limit(series, *graph, delta, alpha), ps.tol_stress);
                o.passed = v.passed;
                o.summary = detail::format("graph t=[%.4g,%.4g] jump=%.4e penalty_mass=%.4e", graph->t_begin(),
                                           graph->t_end(), v.limit.jump, v.limit.penalty_mass) +
                            detail::format(" floor=%.3e", v.floor) + (v.vacuous ? " (no penalty mass on graph)" : "");
            } else if (name == "velocity_jump") {
                const double x0 = ps.velocity_window.at(0), x1 = ps.velocity_window.at(1);
                const auto s1 = segment_contact_frame(get_contact(), series.grid, x0, x1);
                if (!s1)
                    throw ContractError("velocity_jump: window never fully in contact");
                std::vector<double> deltas;
                for (double k : ps.velocity_deltas_dt)
                    deltas.push_back(k * frame_spacing(series));
                const auto v =
                    judge_velocity_jump(velocity_jump_probe(series, series.times[*s1], x0, x1, deltas), ps.tol_velocity);
                o.passed = v.passed;
                std::string s = detail::format("t1=%.5g post:", series.times[*s1]);
                for (const auto& r : v.rows)
                    s += detail::format(" %.3e", r.post_one);
                s += detail::format(" final post/pre=%.3e", v.final_ratio);
                o.summary = s;
            } else if (name == "zero_trace") {
                const auto graph = select_left_boundary(get_contact(), series.grid, 2.0 * dx);
                if (!graph)
                    throw ContractError("zero_trace: no resolved left contact-boundary graph");
                const double tm = 0.5 * (graph->t_begin() + graph->t_end());
                const double tw = 0.5 * (graph->t_end() - graph->t_begin());
                const double xc = graph->at(tm);
                const double xw = std::min({0.1 * l, xc, l - xc});
                const BumpTestFunction phi{tm, tw, xc, xw, 1.0};
                const auto r = zero_trace_residual(series, *graph, phi);
                const double bt = zero_trace_boundary_term(series, *graph, phi);
                o.summary = detail::format("residual=%.4e scale=%.4e boundary_term=%.4e", r.value, r.scale, bt);
            } else {
                throw ContractError("unknown probe '" + name + "'");
            }
        } catch (const ContractError& e) {
            o.passed = false;
            o.contract_violation = true;
            o.summary = e.what();
        }
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace obstring::io
