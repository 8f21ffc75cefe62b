// obstring: command-line driver for the penalized obstacle string solver.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "obstring/io/commands.hpp"
#include "obstring/io/sweep.hpp"

namespace fs = std::filesystem;
using namespace obstring;
using namespace obstring::io;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3, kProbe = 4 };

void print_manifest(const RunManifest& m)
{
    std::printf("output: %s (%s)\n", m.output_dir.string().c_str(), m.solver.c_str());
    for (const auto& f : m.files)
        std::printf("  %-20s %10llu bytes  %s\n", f.name.c_str(), static_cast<unsigned long long>(f.bytes),
                    f.checksum.c_str());
    for (const auto& p : m.phases)
        std::printf("  phase %-16s %.3f s\n", p.name.c_str(), p.seconds);
    for (const auto& s : m.snapshots)
        if (s.requested != s.actual)
            std::printf("  snapshot t=%g taken at stored t=%.17g\n", s.requested, s.actual);
}

int print_probes(const std::vector<ProbeOutcome>& outcomes)
{
    int code = kOk;
    for (const auto& o : outcomes) {
        const char* tag = o.contract_violation ? "CONTRACT" : (o.passed ? "PASS" : "FAIL");
        std::printf("%-9s %-14s %s\n", tag, o.name.c_str(), o.summary.c_str());
        if (!o.passed)
            code = kProbe;
    }
    return code;
}

std::optional<fs::path> opt_path(const std::string& s)
{
    return s.empty() ? std::nullopt : std::optional<fs::path>(s);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Penalized finite-difference solver for a viscoelastic string above an obstacle"};
    app.require_subcommand(1);

    std::string config_path, out_dir, run_dir, axis;
    std::string values_text;
    std::vector<std::string> probe_names;

    auto* run_cmd = app.add_subcommand("run", "Run a configuration file");
    run_cmd->add_option("config", config_path, "INI configuration")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "Output directory (overrides [output].dir)");

    auto* ex1 = app.add_subcommand("example1", "Symmetric drop onto the flat obstacle");
    ex1->add_option("--out", out_dir, "Output directory");
    auto* ex2 = app.add_subcommand("example2", "Asymmetric data with several contact components");
    ex2->add_option("--out", out_dir, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Convergence study over one parameter");
    sweep->add_option("--axis", axis, "epsilon, dt_dx or modes")->required();
    sweep->add_option("--values", values_text, "Comma-separated, strictly increasing values")->required();
    sweep->add_option("config", config_path, "Base INI configuration")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "Output directory (default <dir>/sweep_<axis>)");

    auto* probe = app.add_subcommand("probe", "Evaluate probes on a stored run");
    probe->add_option("run_dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
    probe->add_option("--probe", probe_names, "Probe name (repeatable; default: [probes].enabled)");

    auto* render = app.add_subcommand("render", "Re-render heatmaps of a stored run");
    render->add_option("run_dir", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*run_cmd) {
            print_manifest(cmd_run(load_config(config_path), opt_path(out_dir)));
        } else if (*ex1) {
            print_manifest(cmd_example1(opt_path(out_dir)));
        } else if (*ex2) {
            print_manifest(cmd_example2(opt_path(out_dir)));
        } else if (*sweep) {
            const SweepAxis a = parse_axis(axis);
            std::vector<double> values;
            for (const auto& item : io::detail::split_list(values_text)) {
                double v = 0.0;
                if (!parse_double(item, v))
                    throw ConfigError("--values", "not a number: '" + item + "'");
                values.push_back(v);
            }
            const RunConfig base = load_config(config_path);
            const fs::path dir = out_dir.empty() ? fs::path(base.output.dir) / ("sweep_" + axis_name(a)) : fs::path(out_dir);
            const SweepReport rep = cmd_sweep(a, values, base, dir);
            std::fputs(sweep_csv(rep).c_str(), stdout);
            std::printf("wrote %s\n", (dir / "sweep.csv").string().c_str());
            for (const auto& r : rep.rows)
                if (!r.ok())
                    return kFailure;
        } else if (*probe) {
            return print_probes(cmd_probe(run_dir, probe_names));
        } else if (*render) {
            for (const auto& p : cmd_render(run_dir))
                std::printf("wrote %s\n", p.string().c_str());
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kNumeric;
    } catch (const ContractError& e) {
        std::fprintf(stderr, "contract violation: %s\n", e.what());
        return kProbe;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kFailure;
    }
    return kOk;
}
