#pragma once

// Run orchestration behind the CLI subcommands. A run directory written here
// can be loaded back for probing or re-rendering.

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "obstring/diagnostics/contact.hpp"
#include "obstring/fd_solver.hpp"
#include "obstring/galerkin.hpp"
#include "obstring/io/config.hpp"
#include "obstring/io/csv.hpp"
#include "obstring/io/heatmap.hpp"
#include "obstring/io/manifest.hpp"
#include "obstring/io/probe_runner.hpp"

namespace obstring::io {

namespace fs = std::filesystem;

/// Validates a programmatic configuration the same way a file would be.
inline RunConfig finalize_config(const RunConfig& c)
{
    return parse_config(emit_config(c));
}

/// Parameters shared by both presets: dt = dx = 1/5000.
inline RunConfig fine_base(double horizon)
{
    RunConfig c;
    c.sim.grid = {1.0, 5000};
    c.sim.time = {horizon, static_cast<int>(std::lround(horizon * 5000))};
    c.sim.physics = {0.01, 0.0005};
    c.output.stride = 5;
    return c;
}

inline RunConfig example1_config()
{
    RunConfig c = fine_base(0.3);
    c.sim.init = Example1{};
    c.output.dir = "out/example1";
    c.output.snapshots = {0.0, 0.02, 0.04, 0.06, 0.2, 0.3};
    c.probes.enabled = {"energy", "velocity_jump", "dissipation"};
    return finalize_config(c);
}

inline RunConfig example2_config()
{
    RunConfig c = fine_base(0.5);
    c.sim.init = Example2{};
    c.output.dir = "out/example2";
    c.output.snapshots = {0.0, 0.04, 0.08, 0.16, 0.28, 0.32};
    c.probes.enabled = {"energy", "stress_jump", "zero_trace"};
    return finalize_config(c);
}

struct RunArtifacts {
    RunResult fd;
    std::optional<FieldSeries> galerkin;
    ContactReport contact;
    RunManifest manifest;
};

/// Field rows at the requested snapshot times (nearest stored frame).
inline std::pair<std::vector<std::size_t>, std::vector<SnapshotRecord>> pick_snapshots(const FieldSeries& series,
                                                                                       const std::vector<double>& ts)
{
    std::vector<std::size_t> idx;
    std::vector<SnapshotRecord> rec;
    for (double t : ts) {
        const std::size_t s = series.nearest(t);
        idx.push_back(s);
        rec.push_back({t, series.times[s]});
    }
    return {idx, rec};
}

inline Field2D select_rows(const Field2D& f, const std::vector<std::size_t>& rows)
{
    Field2D out(0, f.cols);
    for (std::size_t s : rows)
        out.append_row(f.row(s));
    return out;
}

inline Field2D mask_field(const ContactReport& rep)
{
    Field2D out(rep.rows, rep.cols);
    for (std::size_t k = 0; k < rep.mask.size(); ++k)
        out.data[k] = rep.mask[k];
    return out;
}

inline std::vector<fs::path> write_heatmaps(const FieldSeries& series, const ContactReport& rep,
                                            const OutputSettings& out, const fs::path& dir)
{
    const bool ppm = out.wants("ppm"), svg = out.wants("svg");
    if (!ppm && !svg)
        return {};
    HeatmapAxes axes{series.times.front(), series.times.back(), 0.0, series.grid.length_l, "velocity"};
    auto written = render_heatmap(series.velocity, axes, Palette::Diverging, dir / "velocity", ppm, svg);
    axes.title = "contact set";
    auto more = render_heatmap(mask_field(rep), axes, Palette::Binary, dir / "contact", ppm, svg);
    written.insert(written.end(), more.begin(), more.end());
    return written;
}

/// Runs the finite-difference solver (and the Galerkin oracle when requested
/// and the endpoint heights agree) and writes every configured output.
inline RunArtifacts execute_run(const RunConfig& cfg, const fs::path& out_dir)
{
    RunArtifacts art;
    RunManifest& m = art.manifest;
    m.output_dir = out_dir;
    m.config_text = emit_config(cfg);
    fs::create_directories(out_dir);

    const SimConfig sim = cfg.effective();
    {
        PhaseTimer timer(m, "fd_solve");
        art.fd = run(sim);
    }
    const bool galerkin = cfg.solver.galerkin && sim.boundary_left == sim.boundary_right;
    if (galerkin) {
        PhaseTimer timer(m, "galerkin_solve");
        GalerkinOptions opts;
        opts.n_modes = cfg.solver.galerkin_modes;
        opts.output_stride = sim.output_stride;
        art.galerkin = integrate(sim.init, sim.grid, sim.time, sim.physics, opts);
    }
    m.solver = galerkin ? "fd+galerkin" : "fd";
    {
        PhaseTimer timer(m, "contact");
        art.contact = extract_contact(art.fd.series);
    }

    PhaseTimer timer(m, "write");
    const FieldSeries& s = art.fd.series;
    const auto xs = s.grid.coordinates();
    m.add_file("energy.csv", energy_csv(art.fd.ledger));
    if (cfg.output.wants("csv")) {
        m.add_file("eta.csv", field_csv(s.times, xs, s.eta));
        m.add_file("velocity.csv", field_csv(s.times, xs, s.velocity));
        m.add_file("penalty.csv", field_csv(s.times, xs, s.penalty_force));
        m.add_file("contact.csv", mask_csv(s.times, xs, art.contact.mask));
        if (!cfg.output.snapshots.empty()) {
            auto [idx, rec] = pick_snapshots(s, cfg.output.snapshots);
            std::vector<double> ts;
            for (const auto& r : rec)
                ts.push_back(r.actual);
            m.add_file("snapshots.csv", field_csv(ts, xs, select_rows(s.eta, idx)));
            m.snapshots = rec;
        }
        if (art.galerkin)
            m.add_file("galerkin_eta.csv", field_csv(art.galerkin->times, xs, art.galerkin->eta));
    }
    for (const auto& p : write_heatmaps(s, art.contact, cfg.output, out_dir))
        m.record_file(p);
    return art;
}

/// Finishes a run: writes manifest.json after the phase timers closed.
inline RunManifest cmd_run(const RunConfig& cfg, const std::optional<fs::path>& out_override = std::nullopt)
{
    RunArtifacts art = execute_run(cfg, out_override ? *out_override : fs::path(cfg.output.dir));
    art.manifest.write();
    return art.manifest;
}

inline RunManifest cmd_example1(const std::optional<fs::path>& out = std::nullopt)
{
    return cmd_run(example1_config(), out);
}

inline RunManifest cmd_example2(const std::optional<fs::path>& out = std::nullopt)
{
    return cmd_run(example2_config(), out);
}

struct LoadedRun {
    RunConfig config;
    FieldSeries series;
    EnergyLedger ledger;
};

/// Reads the configuration snapshot from manifest.json, then the field CSVs
/// and energy.csv.
inline LoadedRun load_run_dir(const fs::path& dir)
{
    LoadedRun r;
    if (!fs::exists(dir / "manifest.json"))
        throw IoError(dir.string() + ": no manifest.json");
    const RunManifest m = RunManifest::from_json(nlohmann::json::parse(read_text(dir / "manifest.json")), dir);
    r.config = parse_config(m.config_text, dir);
    if (!fs::exists(dir / "eta.csv"))
        throw IoError(dir.string() + ": run directory has no field CSVs (output formats lacked csv)");
    const SimConfig sim = r.config.effective();
    FieldTable eta = read_field_csv(dir / "eta.csv");
    FieldTable vel = read_field_csv(dir / "velocity.csv");
    FieldTable pen = read_field_csv(dir / "penalty.csv");
    if (eta.values.cols != sim.grid.nodes() || vel.values.rows != eta.values.rows || pen.values.rows != eta.values.rows)
        throw IoError(dir.string() + ": field files disagree with the manifest configuration");
    r.series.grid = sim.grid;
    r.series.dt = sim.time.dt();
    r.series.times = eta.times;
    for (double t : eta.times)
        r.series.steps.push_back(static_cast<int>(std::lround(t / r.series.dt)));
    r.series.eta = std::move(eta.values);
    r.series.velocity = std::move(vel.values);
    r.series.penalty_force = std::move(pen.values);
    if (fs::exists(dir / "energy.csv"))
        r.ledger = parse_energy_csv(read_text(dir / "energy.csv"));
    return r;
}

inline std::vector<ProbeOutcome> cmd_probe(const fs::path& dir, const std::vector<std::string>& names = {})
{
    const LoadedRun r = load_run_dir(dir);
    return run_probes(r.series, r.ledger, r.config, names);
}

inline std::vector<fs::path> cmd_render(const fs::path& dir)
{
    const LoadedRun r = load_run_dir(dir);
    OutputSettings out = r.config.output;
    if (!out.wants("ppm") && !out.wants("svg"))
        out.formats = {"ppm", "svg"};
    return write_heatmaps(r.series, extract_contact(r.series), out, dir);
}

} // namespace obstring::io
