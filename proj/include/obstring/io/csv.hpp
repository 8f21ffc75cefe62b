#pragma once

// Space-time fields as CSV: a header `t,<x_0>,...,<x_N>` followed by one row
// per stored time. Numbers carry 17 significant digits, which is enough for
// from_chars to reproduce every double bitwise.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "obstring/core.hpp"
#include "obstring/diagnostics/energy.hpp"
#include "obstring/io/config.hpp"

namespace obstring::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void append_number(std::string& out, double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.append(buf, r.ptr);
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Header row of x-coordinates, then `t, values...` per row.
inline std::string field_csv(const std::vector<double>& times, const std::vector<double>& xs, const Field2D& field)
{
    if (field.rows != times.size() || field.cols != xs.size())
        throw ContractError("field_csv: shape mismatch");
    std::string out = "t";
    out.reserve((field.rows + 1) * (field.cols + 1) * 24);
    for (double x : xs) {
        out += ',';
        append_number(out, x);
    }
    out += '\n';
    for (std::size_t s = 0; s < field.rows; ++s) {
        append_number(out, times[s]);
        for (double v : field.row(s)) {
            out += ',';
            append_number(out, v);
        }
        out += '\n';
    }
    return out;
}

struct FieldTable {
    std::vector<double> times;
    std::vector<double> xs;
    Field2D values;
};

/// Parses the field layout. With numeric_header false the header cells are
/// only counted (xs gets one zero per column).
inline FieldTable parse_field_csv(const std::string& text, const std::string& name = "csv", bool numeric_header = true)
{
    FieldTable tab;
    std::size_t pos = 0;
    int lineno = 0;
    auto parse_cells = [&](std::string_view line, std::vector<double>& cells, bool header) {
        cells.clear();
        std::size_t start = 0;
        bool first = true;
        while (start <= line.size()) {
            const auto comma = line.find(',', start);
            const auto end = comma == std::string_view::npos ? line.size() : comma;
            const std::string_view cell = line.substr(start, end - start);
            if (header && !numeric_header) {
                if (!first)
                    cells.push_back(0.0);
            } else if (!(header && first)) {
                double v = 0.0;
                const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (r.ec != std::errc{} || r.ptr != cell.data() + cell.size())
                    throw IoError(name + ":" + std::to_string(lineno) + ": bad number '" + std::string(cell) + "'");
                cells.push_back(v);
            }
            first = false;
            if (comma == std::string_view::npos)
                break;
            start = comma + 1;
        }
    };
    std::vector<double> cells;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos)
            nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        pos = nl + 1;
        ++lineno;
        if (line.empty())
            continue;
        if (lineno == 1) {
            parse_cells(line, tab.xs, true);
            tab.values = Field2D(0, tab.xs.size());
            continue;
        }
        parse_cells(line, cells, false);
        if (cells.size() != tab.xs.size() + 1)
            throw IoError(name + ":" + std::to_string(lineno) + ": expected " + std::to_string(tab.xs.size() + 1) +
                          " columns");
        tab.times.push_back(cells.front());
        tab.values.append_row(std::span<const double>(cells).subspan(1));
    }
    if (lineno == 0)
        throw IoError(name + ": empty file");
    return tab;
}

inline FieldTable read_field_csv(const std::filesystem::path& path)
{
    return parse_field_csv(read_text(path), path.string());
}

inline std::string energy_csv(const EnergyLedger& ledger)
{
    std::string out = "step,t,kinetic,elastic,visc_dissip_cum,contact_work_cum,residual\n";
    for (const auto& r : ledger.rows) {
        out += std::to_string(r.step);
        for (double v : {r.t, r.kinetic, r.elastic, r.visc_dissip_cum, r.contact_work_cum, r.residual}) {
            out += ',';
            append_number(out, v);
        }
        out += '\n';
    }
    return out;
}

inline EnergyLedger parse_energy_csv(const std::string& text, const std::string& name = "energy.csv")
{
    const FieldTable tab = parse_field_csv(text, name, false);
    if (tab.xs.size() != 6)
        throw IoError(name + ": expected 7 columns");
    EnergyLedger ledger;
    for (std::size_t s = 0; s < tab.times.size(); ++s) {
        const auto r = tab.values.row(s);
        EnergyRow row;
        row.step = static_cast<int>(tab.times[s]);
        row.t = r[0];
        row.kinetic = r[1];
        row.elastic = r[2];
        row.visc_dissip_cum = r[3];
        row.contact_work_cum = r[4];
        row.residual = r[5];
        ledger.rows.push_back(row);
    }
    return ledger;
}

/// Contact mask as 0/1 with the same layout as the field files.
inline std::string mask_csv(const std::vector<double>& times, const std::vector<double>& xs,
                            const std::vector<std::uint8_t>& mask)
{
    std::string out = "t";
    for (double x : xs) {
        out += ',';
        append_number(out, x);
    }
    out += '\n';
    const std::size_t cols = xs.size();
    for (std::size_t s = 0; s < times.size(); ++s) {
        append_number(out, times[s]);
        for (std::size_t j = 0; j < cols; ++j) {
            out += ',';
            out += mask[s * cols + j] ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

} // namespace obstring::io
