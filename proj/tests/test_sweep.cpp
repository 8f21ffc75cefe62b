#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "obstring/io/sweep.hpp"

using namespace obstring;
using namespace obstring::io;
namespace fs = std::filesystem;

namespace {

// Fundamental mode that stays above the obstacle for the whole horizon.
RunConfig single_mode_base()
{
    return parse_config("[grid]\nl = 1\nn = 500\n[time]\nT = 0.3\nm = 150\n[physics]\nalpha = 1\nepsilon = 1\n"
                        "[init]\nkind = single_mode\namplitude = 0.3\nmode = 1\noffset = 1\n[output]\nformats = none\n");
}

RunConfig example1_small()
{
    return parse_config("[grid]\nl = 1\nn = 500\n[time]\nT = 0.1\nm = 500\n[physics]\nalpha = 0.01\nepsilon = 0.002\n"
                        "[init]\nkind = example1\n[output]\nformats = none\n");
}

fs::path fresh(const std::string& name)
{
    const auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

} // namespace

TEST(Sweep, RejectsTooFewOrUnsortedValues)
{
    EXPECT_THROW(cmd_sweep(SweepAxis::Epsilon, {0.01}, example1_small(), fresh("sw_one")), ConfigError);
    EXPECT_THROW(cmd_sweep(SweepAxis::Epsilon, {0.01, 0.005}, example1_small(), fresh("sw_dec")), ConfigError);
    EXPECT_THROW(cmd_sweep(SweepAxis::Epsilon, {0.01, 0.01}, example1_small(), fresh("sw_dup")), ConfigError);
    EXPECT_THROW(parse_axis("theta"), ConfigError);
}

TEST(Sweep, ApplyAxis)
{
    const RunConfig c = apply_axis(single_mode_base(), SweepAxis::DtDx, 0.001);
    EXPECT_EQ(c.sim.grid.cells_n, 1000);
    EXPECT_EQ(c.sim.time.steps_m, 300);
    const RunConfig g = apply_axis(single_mode_base(), SweepAxis::Modes, 12);
    EXPECT_TRUE(g.solver.galerkin);
    EXPECT_EQ(g.solver.galerkin_modes, 12);
    EXPECT_THROW(apply_axis(single_mode_base(), SweepAxis::DtDx, 0.0015), ConfigError);
    EXPECT_THROW(apply_axis(single_mode_base(), SweepAxis::Modes, 2.5), ConfigError);
}

TEST(Sweep, ResampleIsLinear)
{
    const Grid1D fine{1.0, 4};
    const std::vector<double> v{0, 1, 4, 9, 16};
    const auto r = resample(v, fine, {0.0, 0.125, 0.5, 1.0});
    EXPECT_DOUBLE_EQ(r[1], 0.5);
    EXPECT_DOUBLE_EQ(r[2], 4.0);
    EXPECT_DOUBLE_EQ(r[3], 16.0);
}

TEST(Sweep, DtDxObservedOrderAgainstModalSolution)
{
    const SweepReport rep = cmd_sweep(SweepAxis::DtDx, {1.0 / 2000, 1.0 / 1000, 1.0 / 500}, single_mode_base(),
                                      fresh("sw_dtdx"));
    ASSERT_EQ(rep.rows.size(), 3u);
    for (const auto& r : rep.rows) {
        ASSERT_TRUE(r.ok()) << r.status;
        EXPECT_EQ(r.max_pointwise, 0.0);
        EXPECT_GT(r.exact_linf, 0.0);
    }
    EXPECT_GE(rep.rows[0].slope_exact, 0.9);
    EXPECT_GE(rep.rows[1].slope_exact, 0.9);
    EXPECT_TRUE(std::isnan(rep.rows[2].slope_exact));
    // Successive differences shrink at first order too.
    EXPECT_LT(rep.rows[0].diff_linf, rep.rows[1].diff_linf);
    EXPECT_TRUE(fs::exists(fs::temp_directory_path() / "sw_dtdx" / "sweep.csv"));
}

TEST(Sweep, EpsilonPenetrationShrinks)
{
    const SweepReport rep = cmd_sweep(SweepAxis::Epsilon, {0.002, 0.004, 0.008}, example1_small(), fresh("sw_eps"));
    for (const auto& r : rep.rows)
        ASSERT_TRUE(r.ok()) << r.status;
    EXPECT_LT(rep.rows[0].max_l1, rep.rows[1].max_l1);
    EXPECT_LT(rep.rows[1].max_l1, rep.rows[2].max_l1);
    EXPECT_GT(rep.rows[0].slope_l1, 0.5);
    const std::string csv = sweep_csv(rep);
    EXPECT_EQ(csv.substr(0, csv.find(',')), "axis");
    EXPECT_NE(csv.find("\nepsilon,0.002,ok,"), std::string::npos);
}

TEST(Sweep, FailedRunIsRecordedAndOthersContinue)
{
    const SweepReport rep =
        cmd_sweep(SweepAxis::DtDx, {0.001, 0.0015, 0.002}, single_mode_base(), fresh("sw_fail"));
    EXPECT_TRUE(rep.rows[0].ok());
    EXPECT_FALSE(rep.rows[1].ok());
    EXPECT_NE(rep.rows[1].status.find("divide"), std::string::npos);
    EXPECT_TRUE(rep.rows[2].ok());
    EXPECT_TRUE(std::isnan(rep.rows[0].diff_linf));
}

TEST(Sweep, ModesAxisComparesGalerkin)
{
    RunConfig base = single_mode_base();
    base.sim.grid.cells_n = 100;
    base.sim.time.steps_m = 300;
    const SweepReport rep = cmd_sweep(SweepAxis::Modes, {4, 8}, finalize_config(base), fresh("sw_modes"));
    for (const auto& r : rep.rows) {
        ASSERT_TRUE(r.ok()) << r.status;
        EXPECT_LT(r.exact_linf, 1e-6);
    }
}

TEST(Sweep, ThreadCapFromEnvironment)
{
    ::setenv("OBSTRING_THREADS", "1", 1);
    EXPECT_EQ(sweep_threads(8), 1u);
    ::setenv("OBSTRING_THREADS", "junk", 1);
    EXPECT_GE(sweep_threads(8), 1u);
    ::unsetenv("OBSTRING_THREADS");
    EXPECT_EQ(sweep_threads(1), 1u);
}
