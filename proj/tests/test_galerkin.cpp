#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "obstring/fd_solver.hpp"
#include "obstring/galerkin.hpp"
#include "oracles.hpp"

using namespace obstring;
using std::numbers::pi;

TEST(Cutoff, SaturationAndMidpoint)
{
    const SmoothCutoff c{0.2};
    EXPECT_EQ(c(-0.4), 1.0);
    EXPECT_EQ(c(0.1), 0.0);
    EXPECT_DOUBLE_EQ(c(-0.1), 0.5);
    double prev = 1.0;
    for (double x = -0.25; x <= 0.05; x += 0.01) {
        EXPECT_LE(c(x), prev + 1e-15);
        prev = c(x);
    }
}

TEST(ModalRhs, SingleModeWithoutContact)
{
    ModalState s;
    s.n_modes = 1;
    s.q = {0.3};
    s.qdot = {0.2};
    s.offset_h = 1.0;
    const Physics p{1.0, 0.01};
    const auto r = modal_rhs(s, p, SmoothCutoff{p.epsilon}, SmoothCutoff{0.1}, 64);
    EXPECT_DOUBLE_EQ(r.dq[0], 0.2);
    EXPECT_NEAR(r.dqdot[0], -pi * pi * (0.2 + 0.3), 1e-12);
}

TEST(ModalRhs, ForceOpposesDownwardMotionBelowObstacle)
{
    ModalState s;
    s.n_modes = 3;
    s.q = {-0.2, 0.0, 0.0};
    s.qdot = {-1.0, 0.0, 0.0};
    s.offset_h = 0.0;
    const Physics p{0.0, 0.01};
    const auto r = modal_rhs(s, p, SmoothCutoff{p.epsilon}, SmoothCutoff{0.1}, 64);
    // Without the penalty mode 1 would accelerate by -lambda q = +0.2 pi^2.
    EXPECT_GT(r.dqdot[0], 0.2 * pi * pi);
}

TEST(DampedMode, MatchesCharacteristicRoots)
{
    struct Case {
        double lambda, alpha, q0, p0, t;
    };
    const Case cases[] = {{pi * pi, 1.0, 0.5, 0.0, 0.3},      // underdamped
                          {pi * pi, 0.01, 0.5, -2.0, 0.17},   // lightly damped
                          {100.0, 1.0, 0.1, 0.3, 0.05},       // overdamped
                          {4.0, 1.0, 1.0, 0.0, 0.7}};         // critical: b^2 = 4 lambda
    for (const auto& c : cases) {
        const auto got = damped_mode_exact(c.lambda, c.alpha, c.q0, c.p0, c.t);
        const auto ref = oracle::damped_oscillator(c.alpha * c.lambda, c.lambda, c.q0, c.p0, c.t);
        EXPECT_NEAR(got.first, ref.first, 1e-12);
        EXPECT_NEAR(got.second, ref.second, 1e-11);
    }
}

TEST(Integrate, FlatRestIsConstant)
{
    const auto s = integrate(SingleMode{0.0, 1, 0.8, 0.0}, Grid1D{1.0, 20}, TimeGrid{0.1, 10}, Physics{0.01, 0.001},
                             GalerkinOptions{8});
    for (double v : s.eta.data)
        EXPECT_NEAR(v, 0.8, 1e-14);
}

TEST(Integrate, SingleModeMatchesClosedForm)
{
    const Grid1D g{1.0, 100};
    const TimeGrid t{0.3, 300};
    const Physics p{1.0, 1.0};
    const auto s = integrate(SingleMode{0.5, 1, 1.0, 0.0}, g, t, p, GalerkinOptions{16});
    double worst = 0.0;
    for (std::size_t r = 0; r < s.stored(); ++r) {
        const double q = oracle::damped_oscillator(pi * pi, pi * pi, 0.5, 0.0, s.times[r]).first;
        for (std::size_t j = 0; j < g.nodes(); ++j)
            worst = std::max(worst, std::abs(s.eta(r, j) - (1.0 + q * std::sin(pi * g.x(j)))));
    }
    EXPECT_LE(worst, 1e-6);
}

TEST(Integrate, AgreesWithFiniteDifferencesBeforeContact)
{
    // Example 1 data, compared up to t = 0.015 (first contact near 0.02).
    const Grid1D g{1.0, 400};
    const TimeGrid t{0.015, 60};
    const Physics p{0.01, 0.002};
    SimConfig c;
    c.grid = g;
    c.time = t;
    c.physics = p;
    c.init = Example1{};
    const auto fd = run(c).series;
    const auto gal = integrate(Example1{}, g, t, p, GalerkinOptions{128});
    ASSERT_EQ(fd.stored(), gal.stored());
    // The sine series of the constant v0 has a Gibbs layer at the pinned
    // ends, so the comparison stays on [0.1, 0.9]; 64 modes leave a 3.6e-3
    // truncation gap there, 128 modes about 8e-4.
    double worst = 0.0;
    for (std::size_t r = 0; r < fd.stored(); ++r)
        for (std::size_t j = 40; j <= 360; ++j)
            worst = std::max(worst, std::abs(fd.eta(r, j) - gal.eta(r, j)));
    std::printf("max interior FD/Galerkin gap %.3e\n", worst);
    EXPECT_LE(worst, 2e-3);
}

TEST(Integrate, UnequalEndpointsRejected)
{
    EXPECT_THROW(integrate(Example2{}, Grid1D{1.0, 20}, TimeGrid{0.1, 10}, Physics{0.01, 0.001}), ConfigError);
}

TEST(Integrate, ZeroModesRejected)
{
    GalerkinOptions o;
    o.n_modes = 0;
    EXPECT_THROW(integrate(Example1{}, Grid1D{1.0, 20}, TimeGrid{0.1, 10}, Physics{0.01, 0.001}, o), ConfigError);
}
