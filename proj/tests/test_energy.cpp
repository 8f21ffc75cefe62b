#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "obstring/fd_solver.hpp"

using namespace obstring;

namespace {

SimConfig mode_config(int n, double alpha = 0.01)
{
    SimConfig c;
    c.grid = {1.0, n};
    c.time = {0.3, n * 3 / 10};
    c.physics = {alpha, 0.002};
    c.init = SingleMode{0.3, 1, 1.0, 0.0};
    return c;
}

} // namespace

TEST(Energy, FlatRestHasZeroLedger)
{
    SimConfig c = mode_config(50);
    c.init = SingleMode{0.0, 1, 1.0, 0.0};
    const auto r = run(c);
    for (const auto& row : r.ledger.rows) {
        EXPECT_EQ(row.kinetic, 0.0);
        EXPECT_NEAR(row.elastic, 0.0, 1e-28);
        EXPECT_EQ(row.visc_dissip_cum, 0.0);
        EXPECT_EQ(row.contact_work_cum, 0.0);
    }
}

TEST(Energy, InitialRowMatchesHandQuadrature)
{
    // eta0 linear with slope 2 on [0,1], v0 = 3 inside, pinned ends.
    const std::vector<double> eta0{0.0, 0.5, 1.0, 1.5, 2.0};
    const std::vector<double> v0{3.0, 3.0, 3.0, 3.0, 3.0};
    const auto row = initial_energy_row(eta0, v0, 0.25);
    EXPECT_DOUBLE_EQ(row.elastic, 0.5 * 4.0);
    EXPECT_DOUBLE_EQ(row.kinetic, 0.5 * 9.0 * 3 * 0.25);
}

TEST(Energy, LinearModeDriftIsFirstOrder)
{
    auto drift = [](int n) {
        const auto r = run(mode_config(n));
        double worst = 0.0;
        for (const auto& row : r.ledger.rows)
            worst = std::max(worst, std::abs(row.residual));
        return worst / r.ledger.initial_energy();
    };
    const double d1 = drift(200), d2 = drift(400);
    EXPECT_LE(d1, 10.0 / 200 * 0.3);
    EXPECT_GT(d1 / d2, 1.6);
}

TEST(Energy, ResidualIsDissipativeAndLedgerNonNegative)
{
    SimConfig c = mode_config(200);
    c.init = Example1{};
    const auto r = run(c);
    for (const auto& row : r.ledger.rows) {
        EXPECT_GE(row.kinetic, 0.0);
        EXPECT_GE(row.elastic, 0.0);
        EXPECT_GE(row.visc_dissip_cum, 0.0);
        EXPECT_LE(row.residual, 1e-9 * r.ledger.initial_energy());
    }
}

TEST(Energy, ContactWorkDecreasesUnderDownwardPenalty)
{
    // dt = 1/1000 <= epsilon, so one penalty step cannot reverse the motion.
    SimConfig c = mode_config(1000);
    c.init = Example1{};
    const auto r = run(c);
    // Single steps may return a sliver of work when the elastic pull lifts a
    // node that is still penalized; the running total must still fall.
    double worst_gain = 0.0;
    for (std::size_t k = 1; k < r.ledger.rows.size(); ++k)
        worst_gain = std::max(worst_gain, r.ledger.rows[k].contact_work_cum - r.ledger.rows[k - 1].contact_work_cum);
    std::printf("largest single-step contact work gain %.3e of E(0)\n", worst_gain / r.ledger.initial_energy());
    EXPECT_LE(worst_gain, 1e-8 * r.ledger.initial_energy());
    EXPECT_LT(r.ledger.rows.back().contact_work_cum, -0.1 * r.ledger.initial_energy());
    EXPECT_EQ(check_energy_monotone(r.ledger).violations, 0u);
}

TEST(Energy, MonotonicityCheckerFlagsIncrease)
{
    EnergyLedger l;
    l.rows.resize(3);
    l.rows[0].kinetic = 1.0;
    l.rows[1].kinetic = 0.9;
    l.rows[2].kinetic = 0.95;
    const auto m = check_energy_monotone(l, 1e-8);
    EXPECT_EQ(m.violations, 1u);
    EXPECT_NEAR(m.worst_increase, 0.05, 1e-15);
}

TEST(Energy, StepRequiresInitialRow)
{
    EnergyLedger l;
    StringState a, b;
    a.eta_curr = b.eta_curr = b.eta_prev = {0.0, 0.0};
    const std::vector<double> f{0.0, 0.0};
    EXPECT_THROW(energy_step(l, a, b, f, validate_config(mode_config(50))), ContractError);
}

TEST(Energy, PenaltyBelowHalfStepInjectsEnergy)
{
    // With eps < dt/2 the factor 1 - dt/eps is below -1: the kick reverses
    // the downward velocity and enlarges it, so contact work turns positive.
    SimConfig c;
    c.grid = {1.0, 200};
    c.time = {0.1, 20};
    c.physics = {0.01, 0.4 * 0.005};
    c.init = Example1{};
    const auto r = run(c);
    EXPECT_GT(r.ledger.rows.back().contact_work_cum, 0.0);
}
