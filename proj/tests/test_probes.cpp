#include <gtest/gtest.h>

#include <cmath>

#include "obstring/diagnostics/contact.hpp"
#include "obstring/diagnostics/probes.hpp"
#include "obstring/fd_solver.hpp"

using namespace obstring;

namespace {

RunResult mode_run(int n, double T = 0.2)
{
    SimConfig c;
    c.grid = {1.0, n};
    c.time = {T, static_cast<int>(std::lround(T * n))};
    c.physics = {0.01, 0.002};
    c.init = SingleMode{0.3, 1, 1.0, 0.5};
    return run(c);
}

const BumpTestFunction kInterior{0.1, 0.08, 0.5, 0.3, 1.0};
const BumpTestFunction kFromStart{0.0, 0.1, 0.4, 0.3, 1.0};

} // namespace

TEST(Probes, ZeroTestFunctionGivesZero)
{
    const auto r = mode_run(100);
    BumpTestFunction zero = kFromStart;
    zero.amplitude = 0.0;
    EXPECT_EQ(weak_momentum_residual(r.series, zero, 0.01).value, 0.0);
    EXPECT_EQ(local_energy_residual(r.series, zero, 0.01).value, 0.0);
    EXPECT_EQ(renormalized_residual(r.series, zero, 0.01).value, 0.0);
}

TEST(Probes, SupportMustStayInsideDomain)
{
    const auto r = mode_run(50);
    const BumpTestFunction wide{0.1, 0.05, 0.1, 0.3, 1.0};
    EXPECT_THROW(weak_momentum_residual(r.series, wide, 0.01), ContractError);
    const BumpTestFunction late{0.19, 0.05, 0.5, 0.2, 1.0};
    EXPECT_THROW(renormalized_residual(r.series, late, 0.01), ContractError);
}

TEST(Probes, WeakMomentumVanishesUnderRefinement)
{
    double prev = INFINITY;
    for (int n : {100, 200, 400}) {
        const auto r = mode_run(n);
        const double a = std::abs(weak_momentum_residual(r.series, kFromStart, 0.01).relative());
        const double b = std::abs(weak_momentum_residual(r.series, kInterior, 0.01).relative());
        const double worst = std::max(a, b);
        EXPECT_LT(worst, prev);
        prev = worst;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(Probes, LocalEnergyVanishesUnderRefinement)
{
    const double coarse = std::abs(local_energy_residual(mode_run(100).series, kFromStart, 0.01).relative());
    const double fine = std::abs(local_energy_residual(mode_run(400).series, kFromStart, 0.01).relative());
    EXPECT_LT(fine, 0.5 * coarse);
}

TEST(Probes, RenormalizedSlackNonNegativeAndShrinksWithoutContact)
{
    const double coarse = renormalized_residual(mode_run(100).series, kInterior, 0.01).relative();
    const double fine = renormalized_residual(mode_run(400).series, kInterior, 0.01).relative();
    EXPECT_GE(coarse, 0.0);
    EXPECT_GE(fine, 0.0);
    EXPECT_LT(fine, coarse);
}

TEST(Probes, RenormalizedSlackOnExample1ContactWindow)
{
    SimConfig c;
    c.grid = {1.0, 1000};
    c.time = {0.1, 100};
    c.physics = {0.01, 0.002};
    c.init = Example1{};
    const auto r = run(c);
    const BumpTestFunction window{0.04, 0.03, 0.5, 0.2, 1.0};
    EXPECT_GE(renormalized_residual(r.series, window, 0.01).relative(), -1e-3);
}

TEST(VelocityJump, ZeroVelocityGivesZeroAverages)
{
    SimConfig c;
    c.grid = {1.0, 50};
    c.time = {0.1, 50};
    c.physics = {0.01, 0.002};
    c.init = SingleMode{0.0, 1, 1.0, 0.0};
    const auto r = run(c);
    for (const auto& row : velocity_jump_probe(r.series, 0.05, 0.3, 0.7, {0.008, 0.004})) {
        EXPECT_EQ(row.post_one, 0.0);
        EXPECT_EQ(row.pre_one, 0.0);
        EXPECT_EQ(row.post_phi, 0.0);
    }
}

TEST(VelocityJump, LinearInWeight)
{
    const auto r = mode_run(200);
    const SpatialWeight w1{1.0, 0.5, 0.2}, w2{2.0, 0.5, 0.2};
    const auto a = velocity_jump_probe(r.series, 0.1, 0.3, 0.7, {0.02, 0.01}, w1);
    const auto b = velocity_jump_probe(r.series, 0.1, 0.3, 0.7, {0.02, 0.01}, w2);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_DOUBLE_EQ(b[k].post_phi, 2.0 * a[k].post_phi);
        EXPECT_DOUBLE_EQ(b[k].pre_phi, 2.0 * a[k].pre_phi);
        EXPECT_NE(a[k].post_phi, 0.0);
    }
}

TEST(StressJump, NoContactGraphGivesNothing)
{
    const auto r = mode_run(400);
    Polyline g;
    for (double t = 0.05; t <= 0.15 + 1e-12; t += 0.01) {
        g.t.push_back(t);
        g.x.push_back(0.3 + 0.2 * t);
    }
    const double delta = 4.0 * r.series.grid.dx();
    const auto j = stress_jump_limit(r.series, g, delta, 0.01);
    EXPECT_EQ(j.penalty_mass, 0.0);
    EXPECT_LT(std::abs(j.jump), 1e-2 * j.side_scale);
}

TEST(StressJump, DeltaBelowTwoCellsRejected)
{
    const auto r = mode_run(100);
    Polyline g{{0.05, 0.1}, {0.5, 0.5}, true};
    EXPECT_THROW(stress_jump_probe(r.series, g, 0.5 * r.series.grid.dx(), 0.01), ContractError);
}

TEST(ZeroTrace, NonMonotoneGraphRejected)
{
    const auto r = mode_run(100);
    Polyline g{{0.05, 0.08, 0.1}, {0.5, 0.6, 0.5}, true};
    EXPECT_THROW(zero_trace_residual(r.series, g, kInterior), ContractError);
}

TEST(ZeroTrace, SmoothRegionMatchesBoundaryTerm)
{
    // Away from contact the identity reduces to the boundary quadrature of v.
    const auto r = mode_run(400);
    Polyline g;
    for (double t = 0.0; t <= 0.2 + 1e-12; t += 0.005) {
        g.t.push_back(t);
        g.x.push_back(0.45 + 0.1 * t);
    }
    const BumpTestFunction phi{0.1, 0.08, 0.5, 0.2, 1.0};
    const auto res = zero_trace_residual(r.series, g, phi);
    const double bt = zero_trace_boundary_term(r.series, g, phi);
    EXPECT_NE(bt, 0.0);
    EXPECT_NEAR(res.value, bt, 2e-2 * std::abs(bt) + 1e-3 * res.scale);
}

TEST(Probes, RenormalizedRefusesStridedFrames)
{
    SimConfig c;
    c.grid = {1.0, 100};
    c.time = {0.2, 20};
    c.physics = {0.01, 0.002};
    c.init = SingleMode{0.3, 1, 1.0, 0.5};
    c.output_stride = 2;
    EXPECT_THROW(renormalized_residual(run(c).series, kInterior, 0.01), ContractError);
}
