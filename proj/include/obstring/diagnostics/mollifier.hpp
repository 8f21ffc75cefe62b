#pragma once

// Space-time mollification with the product bump kernel
// zeta(s, r) = psi(s) psi(r) / Z^2, psi(s) = exp(-1/(1 - s^2)) on |s| < 1.

#include <algorithm>
#include <cmath>
#include <vector>

#include "obstring/core.hpp"

namespace obstring {

struct MollifierKernel {
    double omega = 1.0;

    static double profile(double s)
    {
        if (std::abs(s) >= 1.0)
            return 0.0;
        return std::exp(-1.0 / (1.0 - s * s));
    }

    /// Z = integral of psi over [-1, 1]. psi is flat to all orders at +-1, so
    /// the trapezoid rule converges faster than any power of the spacing.
    static double profile_mass()
    {
        static const double z = [] {
            constexpr int n = 4000;
            const double h = 2.0 / n;
            double acc = 0.0;
            for (int k = 1; k < n; ++k)
                acc += profile(-1.0 + k * h);
            return acc * h;
        }();
        return z;
    }

    /// zeta(s, r), unit mass on [-1, 1]^2.
    static double zeta(double s, double r)
    {
        const double z = profile_mass();
        return profile(s) * profile(r) / (z * z);
    }

    /// Mass of zeta under an independent (midpoint) product rule.
    static double mass(int n = 600)
    {
        const double h = 2.0 / n;
        double acc = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                acc += zeta(-1.0 + (a + 0.5) * h, -1.0 + (b + 0.5) * h);
        return acc * h * h;
    }

    /// Discrete 1D weights on offsets k*spacing, |k| < omega/spacing,
    /// normalized to sum 1 so constants are reproduced exactly.
    std::vector<double> weights(double spacing, int& half_width) const
    {
        half_width = static_cast<int>(std::floor(omega / spacing));
        std::vector<double> w(2 * half_width + 1);
        double sum = 0.0;
        for (int k = -half_width; k <= half_width; ++k) {
            w[k + half_width] = profile(k * spacing / omega);
            sum += w[k + half_width];
        }
        for (double& x : w)
            x /= sum;
        return w;
    }
};

/// Discrete convolution of a (time x space) field with the kernel, the field
/// extended by zero outside the stored window. Time spacing must be uniform.
inline Field2D mollify(const Field2D& field, const MollifierKernel& kernel, double dt_stored, double dx)
{
    if (!(kernel.omega >= 2.0 * std::max(dt_stored, dx) * (1.0 - 1e-12)))
        throw ContractError("mollify: omega must be >= 2 max(dt, dx)");

    int ht = 0, hx = 0;
    const std::vector<double> wt = kernel.weights(dt_stored, ht);
    const std::vector<double> wx = kernel.weights(dx, hx);

    const long rows = static_cast<long>(field.rows);
    const long cols = static_cast<long>(field.cols);

    Field2D tmp(field.rows, field.cols);
    for (long s = 0; s < rows; ++s)
        for (long j = 0; j < cols; ++j) {
            double acc = 0.0;
            for (long b = -hx; b <= hx; ++b) {
                const long jj = j - b;
                if (jj >= 0 && jj < cols)
                    acc += wx[b + hx] * field(s, jj);
            }
            tmp(s, j) = acc;
        }

    Field2D out(field.rows, field.cols);
    for (long s = 0; s < rows; ++s)
        for (long a = -ht; a <= ht; ++a) {
            const long ss = s - a;
            if (ss < 0 || ss >= rows)
                continue;
            const double w = wt[a + ht];
            const auto src = tmp.row(ss);
            auto dst = out.row(s);
            for (long j = 0; j < cols; ++j)
                dst[j] += w * src[j];
        }
    return out;
}

/// Spacing of the stored frames; throws when it is not uniform.
inline double uniform_frame_spacing(const FieldSeries& series)
{
    if (series.stored() < 2)
        throw ContractError("series needs at least two frames");
    const double h = series.times[1] - series.times[0];
    for (std::size_t s = 2; s < series.stored(); ++s)
        if (std::abs(series.times[s] - series.times[s - 1] - h) > 1e-9 * h)
            throw ContractError("stored frames are not uniformly spaced");
    return h;
}

struct DissipationEstimate {
    double total = 0.0;
    double negative_fraction = 0.0; ///< |negative mass| / total absolute mass
    Field2D density;
};

/// D ~ F * (-(v)^omega): penalty times the negated mollified velocity.
inline DissipationEstimate dissipation_estimate(const FieldSeries& series, const MollifierKernel& kernel)
{
    if (!series.has_penalty() || series.velocity.empty())
        throw ContractError("dissipation_estimate: series needs penalty_force and velocity");
    const double h = uniform_frame_spacing(series);
    const double dx = series.grid.dx();
    const Field2D vm = mollify(series.velocity, kernel, h, dx);

    DissipationEstimate out;
    out.density = Field2D(series.stored(), series.eta.cols);
    double pos = 0.0, neg = 0.0;
    for (std::size_t k = 0; k < out.density.data.size(); ++k) {
        const double d = series.penalty_force.data[k] * (-vm.data[k]);
        out.density.data[k] = d;
        if (d > 0.0)
            pos += d;
        else
            neg -= d;
    }
    out.total = (pos - neg) * dx * h;
    out.negative_fraction = (pos + neg) > 0.0 ? neg / (pos + neg) : 0.0;
    return out;
}

} // namespace obstring
