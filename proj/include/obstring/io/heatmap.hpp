#pragma once

// Heatmaps of (time x space) fields: binary PPM (P6) plus an SVG with
// labelled axes. Time runs horizontally, x vertically with x = 0 at the bottom.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "obstring/core.hpp"
#include "obstring/io/csv.hpp"

namespace obstring::io {

enum class Palette {
    Diverging, ///< blue (negative) to white (0) to red (positive), symmetric scale
    Binary,    ///< white for 0, black otherwise
};

struct HeatmapAxes {
    double t_min = 0.0;
    double t_max = 1.0;
    double x_min = 0.0;
    double x_max = 1.0;
    std::string title;
};

using Rgb = std::array<std::uint8_t, 3>;

struct Raster {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels; ///< row-major, row 0 at the top (largest x)

    const Rgb& at(int px, int py) const { return pixels[static_cast<std::size_t>(py) * width + px]; }
};

namespace detail {

inline Rgb lerp(const Rgb& a, const Rgb& b, double w)
{
    Rgb out{};
    for (int k = 0; k < 3; ++k)
        out[k] = static_cast<std::uint8_t>(std::lround(a[k] + (b[k] - a[k]) * w));
    return out;
}

inline Rgb diverging(double v, double scale)
{
    static constexpr Rgb blue{33, 102, 172}, white{255, 255, 255}, red{178, 24, 43};
    if (scale <= 0.0)
        return white;
    const double w = std::clamp(v / scale, -1.0, 1.0);
    return w < 0.0 ? lerp(white, blue, -w) : lerp(white, red, w);
}

} // namespace detail

/// Samples the field onto at most max_px x max_px pixels. Binary maps take
/// the maximum over each pixel's footprint so thin contact strips survive;
/// diverging maps take the nearest sample.
inline Raster rasterize(const Field2D& field, Palette palette, int max_px = 600)
{
    if (field.rows == 0 || field.cols == 0)
        throw ContractError("render_heatmap: empty matrix");
    double scale = 0.0;
    for (double v : field.data) {
        if (!std::isfinite(v))
            throw ContractError("render_heatmap: matrix contains a non-finite value");
        scale = std::max(scale, std::abs(v));
    }
    Raster r;
    r.width = static_cast<int>(std::min<std::size_t>(field.rows, static_cast<std::size_t>(max_px)));
    r.height = static_cast<int>(std::min<std::size_t>(field.cols, static_cast<std::size_t>(max_px)));
    r.pixels.resize(static_cast<std::size_t>(r.width) * r.height);
    for (int py = 0; py < r.height; ++py) {
        const int yb = r.height - 1 - py; // bottom-up
        const std::size_t j0 = static_cast<std::size_t>(yb) * field.cols / r.height;
        const std::size_t j1 = std::max(j0 + 1, static_cast<std::size_t>(yb + 1) * field.cols / r.height);
        for (int px = 0; px < r.width; ++px) {
            const std::size_t s0 = static_cast<std::size_t>(px) * field.rows / r.width;
            const std::size_t s1 = std::max(s0 + 1, static_cast<std::size_t>(px + 1) * field.rows / r.width);
            Rgb c{};
            if (palette == Palette::Binary) {
                bool any = false;
                for (std::size_t s = s0; s < s1 && !any; ++s)
                    for (std::size_t j = j0; j < j1 && !any; ++j)
                        any = field(s, j) != 0.0;
                c = any ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
            } else {
                c = detail::diverging(field((s0 + s1 - 1) / 2, (j0 + j1 - 1) / 2), scale);
            }
            r.pixels[static_cast<std::size_t>(py) * r.width + px] = c;
        }
    }
    return r;
}

inline std::string ppm_bytes(const Raster& r)
{
    std::string out = "P6\n" + std::to_string(r.width) + " " + std::to_string(r.height) + "\n255\n";
    out.reserve(out.size() + r.pixels.size() * 3);
    for (const Rgb& p : r.pixels)
        out.append(reinterpret_cast<const char*>(p.data()), 3);
    return out;
}

/// SVG wrapper: the raster coarsened to at most 200 x 200 cells (runs of equal
/// colour in a column merged into one rect) inside a frame with t/x axes.
inline std::string svg_text(const Raster& full, const HeatmapAxes& axes)
{
    const int cw = std::min(full.width, 200);
    const int ch = std::min(full.height, 200);
    constexpr int margin_l = 60, margin_b = 45, margin_t = 30, margin_r = 20, plot = 400;
    const double sx = static_cast<double>(plot) / cw;
    const double sy = static_cast<double>(plot) / ch;
    auto hex = [](const Rgb& c) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
        return std::string(buf);
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    std::string o;
    const int W = margin_l + plot + margin_r, H = margin_t + plot + margin_b;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) + "\" height=\"" +
         std::to_string(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!axes.title.empty())
        o += "<text x=\"" + std::to_string(margin_l + plot / 2) + "\" y=\"18\" text-anchor=\"middle\">" + axes.title +
             "</text>\n";
    o += "<g transform=\"translate(" + std::to_string(margin_l) + "," + std::to_string(margin_t) +
         ")\" shape-rendering=\"crispEdges\">\n";
    for (int cx = 0; cx < cw; ++cx) {
        const int px = cx * full.width / cw;
        int run_start = 0;
        Rgb run_color = full.at(px, 0);
        for (int cy = 1; cy <= ch; ++cy) {
            const Rgb c = cy < ch ? full.at(px, cy * full.height / ch) : Rgb{};
            if (cy == ch || c != run_color) {
                o += "<rect x=\"" + num(cx * sx) + "\" y=\"" + num(run_start * sy) + "\" width=\"" + num(sx + 0.05) +
                     "\" height=\"" + num((cy - run_start) * sy + 0.05) + "\" fill=\"" + hex(run_color) + "\"/>\n";
                run_start = cy;
                run_color = c;
            }
        }
    }
    o += "</g>\n";
    const std::string x0 = std::to_string(margin_l), x1 = std::to_string(margin_l + plot);
    const std::string y0 = std::to_string(margin_t), y1 = std::to_string(margin_t + plot);
    o += "<rect x=\"" + x0 + "\" y=\"" + y0 + "\" width=\"" + std::to_string(plot) + "\" height=\"" +
         std::to_string(plot) + "\" fill=\"none\" stroke=\"black\"/>\n";
    o += "<text x=\"" + x0 + "\" y=\"" + std::to_string(margin_t + plot + 16) + "\" text-anchor=\"middle\">" +
         num(axes.t_min) + "</text>\n";
    o += "<text x=\"" + x1 + "\" y=\"" + std::to_string(margin_t + plot + 16) + "\" text-anchor=\"middle\">" +
         num(axes.t_max) + "</text>\n";
    o += "<text x=\"" + std::to_string(margin_l + plot / 2) + "\" y=\"" + std::to_string(margin_t + plot + 36) +
         "\" text-anchor=\"middle\">t</text>\n";
    o += "<text x=\"" + std::to_string(margin_l - 6) + "\" y=\"" + y1 + "\" text-anchor=\"end\">" + num(axes.x_min) +
         "</text>\n";
    o += "<text x=\"" + std::to_string(margin_l - 6) + "\" y=\"" + std::to_string(margin_t + 10) +
         "\" text-anchor=\"end\">" + num(axes.x_max) + "</text>\n";
    o += "<text x=\"" + std::to_string(margin_l - 30) + "\" y=\"" + std::to_string(margin_t + plot / 2) +
         "\" text-anchor=\"middle\">x</text>\n";
    o += "</svg>\n";
    return o;
}

/// Writes `<stem>.ppm` and/or `<stem>.svg`; returns the written paths.
inline std::vector<std::filesystem::path> render_heatmap(const Field2D& field, const HeatmapAxes& axes, Palette palette,
                                                         const std::filesystem::path& stem, bool ppm = true,
                                                         bool svg = true)
{
    const Raster r = rasterize(field, palette);
    std::vector<std::filesystem::path> written;
    if (ppm) {
        auto p = stem;
        p += ".ppm";
        write_text(p, ppm_bytes(r));
        written.push_back(p);
    }
    if (svg) {
        auto p = stem;
        p += ".svg";
        write_text(p, svg_text(r, axes));
        written.push_back(p);
    }
    return written;
}

} // namespace obstring::io
