#include <gtest/gtest.h>

#include <filesystem>

#include "obstring/io/commands.hpp"
#include "obstring/io/manifest.hpp"

using namespace obstring;
using namespace obstring::io;
namespace fs = std::filesystem;

namespace {

RunConfig small_run()
{
    RunConfig c = parse_config("[grid]\nl = 1\nn = 80\n[time]\nT = 0.04\nm = 80\n[physics]\nalpha = 0.01\n"
                               "epsilon = 0.002\n[init]\nkind = example1\n[output]\nstride = 4\n"
                               "snapshots = 0, 0.0205, 0.04\n");
    return c;
}

fs::path fresh_dir(const std::string& name)
{
    const auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

} // namespace

TEST(Fnv, KnownVectors)
{
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(hex64(fnv1a64("a")), "af63dc4c8601ec8c");
    EXPECT_EQ(hex64(fnv1a64("foobar")), "85944171f73967e8");
}

TEST(Manifest, RunListsFilesWithValidChecksums)
{
    const auto dir = fresh_dir("obstring_manifest_run");
    const RunManifest m = cmd_run(small_run(), dir);
    for (const char* f : {"eta.csv", "velocity.csv", "penalty.csv", "energy.csv", "contact.csv", "snapshots.csv",
                          "velocity.ppm", "velocity.svg", "contact.ppm", "contact.svg"})
        EXPECT_TRUE(m.lists(f)) << f;
    EXPECT_TRUE(m.verify());
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_GE(m.phases.size(), 3u);
    ASSERT_EQ(m.snapshots.size(), 3u);
    EXPECT_EQ(m.snapshots[1].requested, 0.0205);
    EXPECT_DOUBLE_EQ(m.snapshots[1].actual, 0.02); // nearest stored frame; frames every 2e-3

    const RunManifest back = RunManifest::from_json(nlohmann::json::parse(read_text(dir / "manifest.json")), dir);
    EXPECT_EQ(back.files.size(), m.files.size());
    EXPECT_EQ(back.config_text, m.config_text);
    EXPECT_TRUE(back.verify());

    write_text(dir / "eta.csv", "tampered\n");
    EXPECT_FALSE(back.verify());
}

TEST(Manifest, OutputDisabledListsOnlyEnergy)
{
    RunConfig c = small_run();
    c.output.formats.clear();
    const RunManifest m = cmd_run(c, fresh_dir("obstring_manifest_none"));
    ASSERT_EQ(m.files.size(), 1u);
    EXPECT_EQ(m.files[0].name, "energy.csv");
}

TEST(Manifest, RunsAreDeterministic)
{
    const RunManifest a = cmd_run(small_run(), fresh_dir("obstring_det_a"));
    const RunManifest b = cmd_run(small_run(), fresh_dir("obstring_det_b"));
    ASSERT_EQ(a.files.size(), b.files.size());
    for (std::size_t k = 0; k < a.files.size(); ++k) {
        EXPECT_EQ(a.files[k].name, b.files[k].name);
        EXPECT_EQ(a.files[k].checksum, b.files[k].checksum) << a.files[k].name;
    }
}

TEST(Manifest, GalerkinOnlyWithEqualEndpoints)
{
    RunConfig c = small_run();
    c.solver.galerkin = true;
    c.solver.galerkin_modes = 8;
    const RunManifest m = cmd_run(c, fresh_dir("obstring_gal"));
    EXPECT_EQ(m.solver, "fd+galerkin");
    EXPECT_TRUE(m.lists("galerkin_eta.csv"));

    c.sim.init = Example2{};
    c = finalize_config(c);
    const RunManifest m2 = cmd_run(c, fresh_dir("obstring_gal2"));
    EXPECT_EQ(m2.solver, "fd");
    EXPECT_FALSE(m2.lists("galerkin_eta.csv"));
}

TEST(RunDir, LoadsBackSeriesAndLedger)
{
    const auto dir = fresh_dir("obstring_rundir");
    const RunConfig cfg = small_run();
    const RunArtifacts art = execute_run(cfg, dir);
    art.manifest.write();
    const LoadedRun r = load_run_dir(dir);
    EXPECT_EQ(r.config, cfg);
    EXPECT_EQ(r.series.eta.data, art.fd.series.eta.data);
    EXPECT_EQ(r.series.penalty_force.data, art.fd.series.penalty_force.data);
    EXPECT_EQ(r.series.steps, art.fd.series.steps);
    EXPECT_EQ(r.ledger.rows.size(), art.fd.ledger.rows.size());
    EXPECT_EQ(r.ledger.rows.back().contact_work_cum, art.fd.ledger.rows.back().contact_work_cum);

    const auto rendered = cmd_render(dir);
    EXPECT_EQ(rendered.size(), 4u);
    const auto probes = cmd_probe(dir, {"energy", "renormalized"});
    ASSERT_EQ(probes.size(), 2u);
    EXPECT_TRUE(probes[0].passed) << probes[0].summary;
    EXPECT_TRUE(probes[1].contract_violation) << "stride 4 storage cannot feed the renormalized probe";
}

TEST(RunDir, MissingManifestIsIoError)
{
    const auto dir = fresh_dir("obstring_rundir_empty");
    fs::create_directories(dir);
    EXPECT_THROW(load_run_dir(dir), IoError);
}
