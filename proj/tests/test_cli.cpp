#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result cli(const std::string& args)
{
    Result r;
    const std::string cmd = std::string("\"") + OBSTRING_CLI + "\" " + args + " 2>&1";
    FILE* p = ::popen(cmd.c_str(), "r");
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p))
        r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch()
{
    const auto d = fs::temp_directory_path() / "obstring_cli";
    static const bool once = (fs::remove_all(d), fs::create_directories(d), true);
    (void)once;
    return d;
}

fs::path write_config(const std::string& name, const std::string& text)
{
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

const std::string kSmall = "[grid]\nl = 1\nn = 200\n[time]\nT = 0.08\nm = 160\n[physics]\nalpha = 0.01\n"
                           "epsilon = 0.002\n[init]\nkind = example1\n[probes]\nenabled = energy, renormalized\n";

} // namespace

TEST(Cli, HelpAndUsageErrors)
{
    EXPECT_EQ(cli("--help").code, 0);
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("frobnicate").code, 2);
    EXPECT_EQ(cli("run /nonexistent.ini").code, 2);
}

TEST(Cli, BadConfigExitsTwoWithField)
{
    std::string bad = kSmall;
    bad.replace(bad.find("epsilon = 0.002"), 15, "epsilon = -1");
    const Result r = cli("run " + write_config("bad.ini", bad).string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("[physics].epsilon"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("line 9"), std::string::npos) << r.out;
}

TEST(Cli, RunProbeRender)
{
    const auto cfg = write_config("small.ini", kSmall);
    const auto dir = scratch() / "run";
    const Result run = cli("run " + cfg.string() + " --out " + dir.string());
    ASSERT_EQ(run.code, 0) << run.out;
    EXPECT_NE(run.out.find("eta.csv"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));

    const Result probe = cli("probe " + dir.string());
    EXPECT_EQ(probe.code, 0) << probe.out;
    EXPECT_NE(probe.out.find("PASS      energy"), std::string::npos) << probe.out;
    EXPECT_NE(probe.out.find("PASS      renormalized"), std::string::npos) << probe.out;

    fs::remove(dir / "velocity.svg");
    const Result render = cli("render " + dir.string());
    EXPECT_EQ(render.code, 0) << render.out;
    EXPECT_TRUE(fs::exists(dir / "velocity.svg"));
}

TEST(Cli, ContractFailureExitsFour)
{
    const std::string flat = "[grid]\nl = 1\nn = 50\n[time]\nT = 0.05\nm = 50\n[physics]\nalpha = 0.01\n"
                             "epsilon = 0.01\n[init]\nkind = single_mode\namplitude = 0.1\nmode = 1\n";
    const auto dir = scratch() / "flat";
    ASSERT_EQ(cli("run " + write_config("flat.ini", flat).string() + " --out " + dir.string()).code, 0);
    const Result r = cli("probe " + dir.string() + " --probe velocity_jump");
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.out.find("CONTRACT"), std::string::npos) << r.out;
}

TEST(Cli, SweepWritesCsv)
{
    const auto cfg = write_config("sweep.ini", kSmall);
    const auto dir = scratch() / "sweep";
    const Result r = cli("sweep --axis epsilon --values 0.002,0.004 " + cfg.string() + " --out " + dir.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(dir / "sweep.csv"));
    EXPECT_EQ(cli("sweep --axis epsilon --values 0.002 " + cfg.string() + " --out " + dir.string()).code, 2);
    EXPECT_EQ(cli("sweep --axis theta --values 1,2 " + cfg.string()).code, 2);
}
