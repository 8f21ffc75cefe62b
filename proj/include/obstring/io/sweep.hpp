#pragma once

// Parameter sweeps: one run per value on a worker pool, then pairwise
// comparisons on the coarsest grid and log-log slopes between neighbours.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "obstring/diagnostics/contact.hpp"
#include "obstring/galerkin.hpp"
#include "obstring/io/commands.hpp"

namespace obstring::io {

enum class SweepAxis { Epsilon, DtDx, Modes };

inline SweepAxis parse_axis(std::string_view s)
{
    if (s == "epsilon")
        return SweepAxis::Epsilon;
    if (s == "dt_dx")
        return SweepAxis::DtDx;
    if (s == "modes")
        return SweepAxis::Modes;
    throw ConfigError("--axis", "expected epsilon, dt_dx or modes, got '" + std::string(s) + "'");
}

inline std::string axis_name(SweepAxis a)
{
    switch (a) {
    case SweepAxis::Epsilon: return "epsilon";
    case SweepAxis::DtDx: return "dt_dx";
    case SweepAxis::Modes: return "modes";
    }
    return "?";
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SweepRow {
    double value = 0.0;
    std::string status = "ok";
    double max_pointwise = kNaN;
    double max_l1 = kNaN;
    double diff_linf = kNaN;   ///< final-time difference to the next value
    double diff_l2 = kNaN;
    double slope_l1 = kNaN;    ///< d log(max_l1) / d log(value), epsilon axis
    double slope_diff = kNaN;  ///< d log(diff_linf) / d log(value) between successive differences
    double exact_linf = kNaN;  ///< max over stored frames of |eta - modal solution|, single-mode data
    double slope_exact = kNaN;
    std::filesystem::path dir;

    bool ok() const { return status == "ok"; }
};

struct SweepReport {
    SweepAxis axis = SweepAxis::Epsilon;
    std::vector<SweepRow> rows;
};

/// Base configuration with one axis value applied. dt_dx sets the common
/// step of a square grid, so l and T must be multiples of it.
inline RunConfig apply_axis(RunConfig cfg, SweepAxis axis, double v)
{
    switch (axis) {
    case SweepAxis::Epsilon:
        cfg.sim.physics.epsilon = v;
        break;
    case SweepAxis::DtDx: {
        const double n = cfg.sim.grid.length_l / v, m = cfg.sim.time.horizon_T / v;
        if (std::abs(n - std::round(n)) > 1e-6 * n || std::abs(m - std::round(m)) > 1e-6 * m)
            throw ConfigError("--values", "dt_dx value does not divide l and T");
        cfg.sim.grid.cells_n = static_cast<int>(std::lround(n));
        cfg.sim.time.steps_m = static_cast<int>(std::lround(m));
        cfg.output.stride = 0;
        break;
    }
    case SweepAxis::Modes:
        if (v != std::round(v) || v < 1)
            throw ConfigError("--values", "modes must be positive integers");
        cfg.solver.galerkin = true;
        cfg.solver.galerkin_modes = static_cast<int>(v);
        break;
    }
    return finalize_config(cfg);
}

/// Linear interpolation of nodal values onto the nodes xs.
inline std::vector<double> resample(std::span<const double> values, const Grid1D& grid, const std::vector<double>& xs)
{
    std::vector<double> out;
    out.reserve(xs.size());
    const double dx = grid.dx();
    for (double x : xs) {
        const double pos = std::clamp(x / dx, 0.0, static_cast<double>(grid.cells_n));
        const auto j = std::min(static_cast<std::size_t>(pos), static_cast<std::size_t>(grid.cells_n - 1));
        const double w = pos - static_cast<double>(j);
        out.push_back((1.0 - w) * values[j] + w * values[j + 1]);
    }
    return out;
}

/// Largest deviation from the damped modal solution over the stored frames.
/// Only meaningful while the penalty stays inactive.
inline double modal_exact_linf(const FieldSeries& s, const SingleMode& m, double alpha)
{
    const double l = s.grid.length_l;
    const double k = m.mode * std::numbers::pi / l;
    double worst = 0.0;
    for (std::size_t r = 0; r < s.stored(); ++r) {
        const double q = damped_mode_exact(k * k, alpha, m.amplitude, m.v0, s.times[r]).first;
        const auto row = s.eta.row(r);
        for (int j = 0; j <= s.grid.cells_n; ++j)
            worst = std::max(worst, std::abs(row[j] - (m.offset + q * std::sin(k * s.grid.x(j)))));
    }
    return worst;
}

inline unsigned sweep_threads(std::size_t jobs)
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("OBSTRING_THREADS")) {
        int cap = 0;
        if (parse_int(env, cap) && cap >= 1)
            n = std::min(n, static_cast<unsigned>(cap));
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, jobs));
}

namespace detail {

inline double loglog_slope(double y0, double y1, double x0, double x1)
{
    if (!(y0 > 0.0) || !(y1 > 0.0))
        return kNaN;
    return std::log(y1 / y0) / std::log(x1 / x0);
}

struct SweepRun {
    std::optional<FieldSeries> field; ///< the series being compared: FD, or Galerkin on the modes axis
};

} // namespace detail

inline std::string sweep_csv(const SweepReport& rep)
{
    std::string out = "axis,value,status,max_pointwise,max_l1,diff_linf_next,diff_l2_next,slope_l1,slope_diff,"
                      "exact_linf,slope_exact,dir\n";
    for (const auto& r : rep.rows) {
        out += axis_name(rep.axis) + ",";
        append_number(out, r.value);
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out += "," + status;
        for (double v : {r.max_pointwise, r.max_l1, r.diff_linf, r.diff_l2, r.slope_l1, r.slope_diff, r.exact_linf,
                         r.slope_exact}) {
            out += ',';
            if (std::isfinite(v))
                append_number(out, v);
        }
        out += "," + r.dir.generic_string() + "\n";
    }
    return out;
}

/// Runs every value (each in `out_dir/<axis>_<k>`), then fills the
/// comparison columns and writes out_dir/sweep.csv.
inline SweepReport cmd_sweep(SweepAxis axis, std::vector<double> values, const RunConfig& base,
                             const std::filesystem::path& out_dir)
{
    if (values.size() < 2)
        throw ConfigError("--values", "a sweep needs at least two values");
    if (!std::is_sorted(values.begin(), values.end()) ||
        std::adjacent_find(values.begin(), values.end()) != values.end())
        throw ConfigError("--values", "values must be strictly increasing");

    SweepReport rep;
    rep.axis = axis;
    rep.rows.resize(values.size());
    std::vector<detail::SweepRun> runs(values.size());
    std::filesystem::create_directories(out_dir);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < values.size(); k = next++) {
            SweepRow& row = rep.rows[k];
            row.value = values[k];
            row.dir = out_dir / (axis_name(axis) + "_" + std::to_string(k));
            try {
                const RunConfig cfg = apply_axis(base, axis, values[k]);
                RunArtifacts art = execute_run(cfg, row.dir);
                art.manifest.write();
                const auto pen = penetration_metrics(art.fd.series, art.fd.series.grid.dx());
                row.max_pointwise = pen.max_pointwise;
                row.max_l1 = pen.max_l1;
                FieldSeries& compared = axis == SweepAxis::Modes && art.galerkin ? *art.galerkin : art.fd.series;
                if (const auto* m = std::get_if<SingleMode>(&cfg.sim.init))
                    row.exact_linf = modal_exact_linf(compared, *m, cfg.sim.physics.alpha);
                runs[k].field = std::move(compared);
            } catch (const std::exception& e) {
                row.status = std::string("error: ") + e.what();
            }
        }
    };
    const unsigned n_threads = sweep_threads(values.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();

    // Comparisons happen on the coarsest successful grid.
    std::optional<Grid1D> coarse;
    for (const auto& r : runs)
        if (r.field && (!coarse || r.field->grid.cells_n < coarse->cells_n))
            coarse = r.field->grid;
    if (coarse) {
        const auto xs = coarse->coordinates();
        for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
            if (!runs[k].field || !runs[k + 1].field)
                continue;
            const auto& a = *runs[k].field;
            const auto& b = *runs[k + 1].field;
            const auto ra = resample(a.eta.row(a.stored() - 1), a.grid, xs);
            const auto rb = resample(b.eta.row(b.stored() - 1), b.grid, xs);
            double linf = 0.0, l2 = 0.0;
            for (std::size_t j = 0; j < xs.size(); ++j) {
                const double d = ra[j] - rb[j];
                linf = std::max(linf, std::abs(d));
                l2 += d * d * coarse->dx();
            }
            rep.rows[k].diff_linf = linf;
            rep.rows[k].diff_l2 = std::sqrt(l2);
        }
    }
    for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k) {
        SweepRow& r = rep.rows[k];
        const SweepRow& n = rep.rows[k + 1];
        r.slope_l1 = detail::loglog_slope(r.max_l1, n.max_l1, r.value, n.value);
        r.slope_exact = detail::loglog_slope(r.exact_linf, n.exact_linf, r.value, n.value);
        if (k + 2 < rep.rows.size())
            r.slope_diff = detail::loglog_slope(r.diff_linf, n.diff_linf, r.value, n.value);
    }
    write_text(out_dir / "sweep.csv", sweep_csv(rep));
    return rep;
}

} // namespace obstring::io
