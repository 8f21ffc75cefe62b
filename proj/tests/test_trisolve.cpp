#include <gtest/gtest.h>

#include <random>

#include "obstring/trisolve.hpp"
#include "oracles.hpp"

using namespace obstring;

namespace {

Tridiagonal random_dominant(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    std::uniform_real_distribution<double> margin(0.1, 2.0);
    std::bernoulli_distribution neg(0.5);
    Tridiagonal m;
    m.lower.resize(n - 1);
    m.upper.resize(n - 1);
    m.diag.resize(n);
    for (auto& v : m.lower)
        v = off(rng);
    for (auto& v : m.upper)
        v = off(rng);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        if (k > 0)
            s += std::abs(m.lower[k - 1]);
        if (k + 1 < n)
            s += std::abs(m.upper[k]);
        m.diag[k] = (s + margin(rng)) * (neg(rng) ? -1.0 : 1.0);
    }
    return m;
}

std::vector<std::vector<double>> dense(const Tridiagonal& m)
{
    const std::size_t n = m.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        a[k][k] = m.diag[k];
        if (k > 0)
            a[k][k - 1] = m.lower[k - 1];
        if (k + 1 < n)
            a[k][k + 1] = m.upper[k];
    }
    return a;
}

double rel_err(const std::vector<double>& x, const std::vector<double>& ref)
{
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        num = std::max(num, std::abs(x[k] - ref[k]));
        den = std::max(den, std::abs(ref[k]));
    }
    return num / std::max(den, 1e-300);
}

} // namespace

TEST(Thomas, MatchesDenseEliminationOnSeededSystems)
{
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> size(1, 16);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = static_cast<std::size_t>(size(rng));
        const Tridiagonal m = random_dominant(rng, n);
        std::vector<double> b(n);
        for (auto& v : b)
            v = val(rng);
        worst = std::max(worst, rel_err(thomas_solve(m, b), oracle::dense_solve(dense(m), b)));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(Thomas, FactorizationIsReusable)
{
    std::mt19937_64 rng(7);
    const Tridiagonal m = random_dominant(rng, 12);
    const ThomasFactorization f(m);
    for (int k = 0; k < 5; ++k) {
        std::vector<double> b(12);
        for (std::size_t j = 0; j < b.size(); ++j)
            b[j] = std::sin(1.0 + k + j);
        const auto x = f.solve(b);
        const auto back = m.multiply(x);
        for (std::size_t j = 0; j < b.size(); ++j)
            EXPECT_NEAR(back[j], b[j], 1e-12);
    }
}

TEST(Thomas, SingleUnknown)
{
    Tridiagonal m{{}, {4.0}, {}};
    const std::vector<double> b{2.0};
    EXPECT_DOUBLE_EQ(thomas_solve(m, b)[0], 0.5);
}

TEST(Thomas, ZeroPivotRaisesNumericError)
{
    Tridiagonal m{{1.0}, {0.0, 1.0}, {1.0}};
    EXPECT_THROW(ThomasFactorization{m}, NumericError);
}

TEST(Thomas, RhsLengthMismatchIsContractError)
{
    Tridiagonal m{{-1.0}, {4.0, 4.0}, {-1.0}};
    const ThomasFactorization f(m);
    const std::vector<double> b{1.0, 2.0, 3.0};
    EXPECT_THROW(f.solve(b), ContractError);
}

TEST(Thomas, InconsistentBandsAreContractError)
{
    Tridiagonal m{{-1.0, -1.0}, {4.0, 4.0}, {-1.0}};
    EXPECT_THROW(ThomasFactorization{m}, ContractError);
}

TEST(StepMatrix, EntriesAndDominance)
{
    const Grid1D g{1.0, 10};
    const TimeGrid t{0.1, 10};
    const Physics p{0.01, 0.001};
    const Tridiagonal m = assemble_step_matrix(g, t, p);
    ASSERT_EQ(m.size(), 9u);
    const double dt = 0.01, dx = 0.1;
    const double stiff = (0.01 / dt + 1.0) / (dx * dx);
    EXPECT_NEAR(m.diag[0], 1.0 / (dt * dt) + 2.0 * stiff, 1e-9);
    EXPECT_NEAR(m.lower[3], -stiff, 1e-12);
    EXPECT_NEAR(m.upper[3], -stiff, 1e-12);
    EXPECT_GT(m.dominance_ratio(), 1.0);
}
