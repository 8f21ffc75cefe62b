#pragma once

// Contact set extraction, penetration metrics and contact-boundary tracking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "obstring/core.hpp"

namespace obstring {

/// Piecewise-linear graph x = f(t). `left_edge` is true when the contact set
/// lies to the right of the curve.
struct Polyline {
    std::vector<double> t;
    std::vector<double> x;
    bool left_edge = true;

    std::size_t size() const { return t.size(); }
    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }

    double at(double time) const
    {
        if (t.empty())
            throw ContractError("Polyline::at: empty graph");
        if (time <= t.front())
            return x.front();
        if (time >= t.back())
            return x.back();
        const auto it = std::upper_bound(t.begin(), t.end(), time);
        const std::size_t k = static_cast<std::size_t>(it - t.begin());
        const double w = (time - t[k - 1]) / (t[k] - t[k - 1]);
        return (1.0 - w) * x[k - 1] + w * x[k];
    }

    bool monotone() const
    {
        bool up = true, down = true;
        for (std::size_t k = 1; k < x.size(); ++k) {
            up = up && x[k] >= x[k - 1];
            down = down && x[k] <= x[k - 1];
        }
        return up || down;
    }

    /// Restriction to [a, b] (inclusive sample points).
    Polyline window(double a, double b) const
    {
        Polyline out;
        out.left_edge = left_edge;
        for (std::size_t k = 0; k < t.size(); ++k)
            if (t[k] >= a && t[k] <= b) {
                out.t.push_back(t[k]);
                out.x.push_back(x[k]);
            }
        return out;
    }
};

struct ContactReport {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> mask; ///< rows x cols, 1 = in contact
    std::vector<Polyline> boundary_graphs;
    std::optional<double> first_contact_time;
    double total_penalty_impulse = 0.0;
    std::vector<int> components; ///< connected components per stored frame

    bool in_contact(std::size_t s, std::size_t j) const { return mask[s * cols + j] != 0; }
    int max_components() const
    {
        return components.empty() ? 0 : *std::max_element(components.begin(), components.end());
    }
};

struct ContactOptions {
    double link_tol = 0.0; ///< max boundary jump between frames; 0 selects 10 dx
};

/// Trapezoid-in-time weights of the stored frames.
inline std::vector<double> frame_weights(const std::vector<double>& times)
{
    std::vector<double> w(times.size(), 0.0);
    for (std::size_t s = 1; s < times.size(); ++s) {
        const double h = times[s] - times[s - 1];
        w[s - 1] += 0.5 * h;
        w[s] += 0.5 * h;
    }
    return w;
}

inline int count_components(const std::uint8_t* row, std::size_t cols)
{
    int count = 0;
    bool inside = false;
    for (std::size_t j = 0; j < cols; ++j) {
        const bool m = row[j] != 0;
        if (m && !inside)
            ++count;
        inside = m;
    }
    return count;
}

struct PenetrationMetrics {
    double max_pointwise = 0.0;
    double max_l1 = 0.0;
};

/// max over stored t of max_j eta_j^- and of sum_j eta_j^- dx.
inline PenetrationMetrics penetration_metrics(const FieldSeries& series, double dx)
{
    PenetrationMetrics out;
    for (std::size_t s = 0; s < series.stored(); ++s) {
        double l1 = 0.0;
        for (double e : series.eta.row(s)) {
            const double neg = std::max(0.0, -e);
            out.max_pointwise = std::max(out.max_pointwise, neg);
            l1 += neg;
        }
        out.max_l1 = std::max(out.max_l1, l1 * dx);
    }
    return out;
}

namespace detail {

struct Crossing {
    double x;
    bool rising; ///< mask goes 0 -> 1 left to right
};

inline std::vector<Crossing> crossings(const std::uint8_t* mask, std::span<const double> eta, const Grid1D& grid)
{
    std::vector<Crossing> out;
    const double dx = grid.dx();
    for (std::size_t j = 0; j + 1 < eta.size(); ++j) {
        if (mask[j] == mask[j + 1])
            continue;
        double x = grid.x(j) + 0.5 * dx;
        if ((eta[j] > 0.0) != (eta[j + 1] > 0.0) && eta[j] != eta[j + 1])
            x = grid.x(j) + dx * eta[j] / (eta[j] - eta[j + 1]);
        out.push_back({x, mask[j + 1] != 0});
    }
    return out;
}

} // namespace detail

/// Builds the contact mask (eta <= 0 or F > 0 at interior nodes; endpoints
/// are never in contact) and traces its boundary through time. A crossing
/// continues an existing polyline only if exactly one candidate of the same
/// orientation lies within link_tol and no other crossing claims it.
inline ContactReport extract_contact(const FieldSeries& series, const ContactOptions& opts = {})
{
    if (series.eta.empty() || !series.has_penalty())
        throw ContractError("extract_contact: series needs eta and penalty_force");

    ContactReport rep;
    rep.rows = series.stored();
    rep.cols = series.eta.cols;
    rep.mask.assign(rep.rows * rep.cols, 0);
    rep.components.assign(rep.rows, 0);

    const double dx = series.grid.dx();
    const double link_tol = opts.link_tol > 0.0 ? opts.link_tol : 10.0 * dx;

    std::vector<Polyline> finished;
    std::vector<Polyline> active;

    for (std::size_t s = 0; s < rep.rows; ++s) {
        const auto eta = series.eta.row(s);
        const auto f = series.penalty_force.row(s);
        std::uint8_t* m = &rep.mask[s * rep.cols];
        double impulse = 0.0;
        for (std::size_t j = 1; j + 1 < rep.cols; ++j) {
            m[j] = (eta[j] <= 0.0 || f[j] > 0.0) ? 1 : 0;
            impulse += f[j];
        }
        // force row s acts over (t_s, t_{s+1}]
        if (s + 1 < rep.rows)
            rep.total_penalty_impulse += impulse * dx * (series.times[s + 1] - series.times[s]);
        rep.components[s] = count_components(m, rep.cols);
        if (!rep.first_contact_time && rep.components[s] > 0)
            rep.first_contact_time = series.times[s];

        const auto cross = detail::crossings(m, eta, series.grid);
        const double t = series.times[s];

        std::vector<int> claim(cross.size(), -1);
        std::vector<int> claimed_by(active.size(), 0);
        for (std::size_t c = 0; c < cross.size(); ++c) {
            int found = -1;
            int count = 0;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (active[a].left_edge != cross[c].rising)
                    continue;
                if (std::abs(active[a].x.back() - cross[c].x) <= link_tol) {
                    found = static_cast<int>(a);
                    ++count;
                }
            }
            if (count == 1) {
                claim[c] = found;
                ++claimed_by[found];
            }
        }

        std::vector<Polyline> next_active;
        std::vector<bool> continued(active.size(), false);
        for (std::size_t c = 0; c < cross.size(); ++c) {
            if (claim[c] >= 0 && claimed_by[claim[c]] == 1) {
                Polyline p = std::move(active[claim[c]]);
                continued[claim[c]] = true;
                p.t.push_back(t);
                p.x.push_back(cross[c].x);
                next_active.push_back(std::move(p));
            } else {
                Polyline p;
                p.left_edge = cross[c].rising;
                p.t.push_back(t);
                p.x.push_back(cross[c].x);
                next_active.push_back(std::move(p));
            }
        }
        for (std::size_t a = 0; a < active.size(); ++a)
            if (!continued[a])
                finished.push_back(std::move(active[a]));
        active = std::move(next_active);
    }
    for (auto& p : active)
        finished.push_back(std::move(p));

    std::stable_sort(finished.begin(), finished.end(),
                     [](const Polyline& a, const Polyline& b) { return a.t_begin() < b.t_begin(); });
    rep.boundary_graphs = std::move(finished);
    return rep;
}

/// Penalty impulse on cells outside the contact mask (zero by construction
/// of the mask; kept as an explicit check).
inline double impulse_outside_mask(const FieldSeries& series, const ContactReport& rep)
{
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < rep.rows; ++s) {
        const auto f = series.penalty_force.row(s);
        double row = 0.0;
        for (std::size_t j = 0; j < rep.cols; ++j)
            if (!rep.in_contact(s, j))
                row += std::abs(f[j]);
        acc += row * (series.times[s + 1] - series.times[s]);
    }
    return acc * series.grid.dx();
}

} // namespace obstring
