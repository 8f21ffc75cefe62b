#pragma once

// INI-style run configuration made of `[section]` headers and `key = value`
// lines; `#` and `;` start comments. Unknown keys are rejected with the line
// they appear on.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "obstring/core.hpp"

namespace obstring::io {

struct OutputSettings {
    int stride = 0; ///< 0 selects default_output_stride(m)
    std::string dir = "out";
    std::vector<std::string> formats{"csv", "ppm", "svg"};
    std::vector<double> snapshots;

    bool wants(std::string_view fmt) const
    {
        for (const auto& f : formats)
            if (f == fmt)
                return true;
        return false;
    }
    bool operator==(const OutputSettings&) const = default;
};

struct SolverSettings {
    Startup startup = Startup::SchemeGhost;
    bool galerkin = false;
    int galerkin_modes = 32;

    bool operator==(const SolverSettings&) const = default;
};

/// Probe selection, tolerances and evaluation windows.
struct ProbeSettings {
    std::vector<std::string> enabled{"energy", "weak_momentum", "local_energy", "renormalized", "dissipation"};
    double tol_energy = 1e-8;    ///< per-step energy increase, relative to E(0)
    double tol_renorm = 1e-3;    ///< renormalized slack, relative to the term scale
    double tol_stress = 0.25;    ///< relative stress-jump / penalty-mass mismatch
    double tol_velocity = 1e-2;  ///< post/pre velocity-average ratio
    double stress_delta_dx = 2;  ///< stress tube width in units of dx
    std::vector<double> velocity_window{0.47, 0.53};
    std::vector<double> velocity_deltas_dt{8, 4, 2, 1}; ///< in stored-frame spacings (dt at stride 1)
    std::vector<double> omega_dx{8, 4, 2};              ///< in units of max(dx, stored-frame spacing)

    bool operator==(const ProbeSettings&) const = default;
};

struct RunConfig {
    SimConfig sim;
    std::string init_file; ///< set when [init].kind = tabulated
    OutputSettings output;
    SolverSettings solver;
    ProbeSettings probes;

    /// Effective storage stride after applying the default.
    int stride() const { return output.stride > 0 ? output.stride : default_output_stride(sim.time.steps_m); }
    /// SimConfig with the effective stride and startup applied.
    SimConfig effective() const
    {
        SimConfig c = sim;
        c.output_stride = stride();
        c.startup = solver.startup;
        return c;
    }
    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt_double(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

inline std::string join_doubles(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k)
            out += ", ";
        out += fmt_double(v[k]);
    }
    return out;
}

inline std::string join_strings(const std::vector<std::string>& v)
{
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k)
            out += ", ";
        out += v[k];
    }
    return out;
}

inline std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        if (!piece.empty())
            out.push_back(piece);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace detail

/// Parses a double with from_chars; rejects trailing garbage.
inline bool parse_double(std::string_view s, double& out)
{
    const std::string t = detail::trim(s);
    if (t.empty())
        return false;
    const char* b = t.data();
    if (*b == '+')
        ++b;
    const auto r = std::from_chars(b, t.data() + t.size(), out);
    return r.ec == std::errc{} && r.ptr == t.data() + t.size();
}

inline bool parse_int(std::string_view s, int& out)
{
    const std::string t = detail::trim(s);
    if (t.empty())
        return false;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    return r.ec == std::errc{} && r.ptr == t.data() + t.size();
}

/// Reads tabulated initial data: one `eta0, v0` pair per line, optional
/// non-numeric header, `#` comments.
inline Tabulated load_tabulated(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("[init].file", "cannot open " + path.string());
    Tabulated tab;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty())
            continue;
        const auto cells = detail::split_list(body);
        double a = 0.0, b = 0.0;
        if (cells.size() != 2 || !parse_double(cells[0], a) || !parse_double(cells[1], b)) {
            if (tab.eta0.empty() && lineno == 1)
                continue; // header
            throw ConfigError("[init].file", path.string() + ":" + std::to_string(lineno) + ": expected 'eta0, v0'");
        }
        tab.eta0.push_back(a);
        tab.v0.push_back(b);
    }
    return tab;
}

/// Parses configuration text. Relative [init].file paths resolve against
/// base_dir. Throws ConfigError naming the field and the line.
inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {})
{
    RunConfig cfg;
    std::map<std::string, std::pair<std::string, int>> kv; // "section.key" -> (value, line)

    static const std::map<std::string, std::set<std::string>> schema{
        {"grid", {"l", "n"}},
        {"time", {"T", "m"}},
        {"physics", {"alpha", "epsilon"}},
        {"init", {"kind", "amplitude", "mode", "offset", "v0", "file"}},
        {"output", {"stride", "dir", "formats", "snapshots"}},
        {"solver", {"startup", "galerkin", "galerkin_modes"}},
        {"probes",
         {"enabled", "tol_energy", "tol_renorm", "tol_stress", "tol_velocity", "stress_delta_dx", "velocity_window",
          "velocity_deltas_dt", "omega_dx"}},
    };

    std::string section;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    auto where = [&](int ln) { return "line " + std::to_string(ln) + ": "; };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto cpos = line.find_first_of("#;");
        if (cpos != std::string::npos)
            line = line.substr(0, cpos);
        line = detail::trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("", where(lineno) + "malformed section header");
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (!schema.count(section))
                throw ConfigError("[" + section + "]", where(lineno) + "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", where(lineno) + "expected 'key = value'");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (section.empty())
            throw ConfigError(key, where(lineno) + "key outside of any section");
        const std::string field = "[" + section + "]." + key;
        if (!schema.at(section).count(key))
            throw ConfigError(field, where(lineno) + "unknown key");
        const std::string id = section + "." + key;
        if (kv.count(id))
            throw ConfigError(field, where(lineno) + "duplicate key");
        kv[id] = {value, lineno};
    }

    auto field_name = [](const std::string& id) {
        const auto dot = id.find('.');
        return "[" + id.substr(0, dot) + "]." + id.substr(dot + 1);
    };
    auto require = [&](const std::string& id) -> const std::pair<std::string, int>& {
        const auto it = kv.find(id);
        if (it == kv.end())
            throw ConfigError(field_name(id), "missing required key");
        return it->second;
    };
    auto get_double = [&](const std::string& id, double& out) {
        const auto& [v, ln] = require(id);
        if (!parse_double(v, out) || !std::isfinite(out))
            throw ConfigError(field_name(id), where(ln) + "expected a number, got '" + v + "'");
    };
    auto get_int = [&](const std::string& id, int& out) {
        const auto& [v, ln] = require(id);
        if (!parse_int(v, out))
            throw ConfigError(field_name(id), where(ln) + "expected an integer, got '" + v + "'");
    };
    auto get_doubles = [&](const std::string& id, std::vector<double>& out) {
        const auto& [v, ln] = require(id);
        out.clear();
        for (const auto& piece : detail::split_list(v)) {
            double d = 0.0;
            if (!parse_double(piece, d) || !std::isfinite(d))
                throw ConfigError(field_name(id), where(ln) + "expected a list of numbers");
            out.push_back(d);
        }
    };
    auto has = [&](const std::string& id) { return kv.count(id) != 0; };
    auto line_of = [&](const std::string& id) { return kv.at(id).second; };

    get_double("grid.l", cfg.sim.grid.length_l);
    get_int("grid.n", cfg.sim.grid.cells_n);
    get_double("time.T", cfg.sim.time.horizon_T);
    get_int("time.m", cfg.sim.time.steps_m);
    get_double("physics.alpha", cfg.sim.physics.alpha);
    get_double("physics.epsilon", cfg.sim.physics.epsilon);

    const std::string kind = require("init.kind").first;
    const std::set<std::string> mode_keys{"init.amplitude", "init.mode", "init.offset", "init.v0"};
    if (kind == "example1" || kind == "example2") {
        for (const auto& id : mode_keys)
            if (has(id))
                throw ConfigError(field_name(id), where(line_of(id)) + "not used by kind " + kind);
        if (has("init.file"))
            throw ConfigError("[init].file", where(line_of("init.file")) + "not used by kind " + kind);
        cfg.sim.init = kind == "example1" ? InitialData{Example1{}} : InitialData{Example2{}};
    } else if (kind == "single_mode") {
        if (has("init.file"))
            throw ConfigError("[init].file", where(line_of("init.file")) + "not used by kind single_mode");
        SingleMode m;
        get_double("init.amplitude", m.amplitude);
        get_int("init.mode", m.mode);
        if (has("init.offset"))
            get_double("init.offset", m.offset);
        if (has("init.v0"))
            get_double("init.v0", m.v0);
        cfg.sim.init = m;
    } else if (kind == "tabulated") {
        for (const auto& id : mode_keys)
            if (has(id))
                throw ConfigError(field_name(id), where(line_of(id)) + "not used by kind tabulated");
        cfg.init_file = require("init.file").first;
        std::filesystem::path p(cfg.init_file);
        if (p.is_relative() && !base_dir.empty())
            p = base_dir / p;
        // Stored absolute so the config snapshot in a run directory still resolves.
        cfg.init_file = std::filesystem::absolute(p).lexically_normal().string();
        cfg.sim.init = load_tabulated(p);
    } else {
        throw ConfigError("[init].kind", where(line_of("init.kind")) + "unknown kind '" + kind + "'");
    }

    if (has("output.stride"))
        get_int("output.stride", cfg.output.stride);
    if (has("output.dir"))
        cfg.output.dir = require("output.dir").first;
    if (has("output.formats")) {
        const auto& [v, ln] = require("output.formats");
        cfg.output.formats = detail::split_list(v);
        for (const auto& f : cfg.output.formats)
            if (f != "csv" && f != "ppm" && f != "svg" && f != "none")
                throw ConfigError("[output].formats", where(ln) + "unknown format '" + f + "'");
        if (cfg.output.wants("none")) {
            if (cfg.output.formats.size() != 1)
                throw ConfigError("[output].formats", where(ln) + "'none' cannot be combined with other formats");
            cfg.output.formats.clear();
        }
    }
    if (has("output.snapshots"))
        get_doubles("output.snapshots", cfg.output.snapshots);

    if (has("solver.startup")) {
        const auto& [v, ln] = require("solver.startup");
        if (v == "scheme_ghost")
            cfg.solver.startup = Startup::SchemeGhost;
        else if (v == "explicit")
            cfg.solver.startup = Startup::Explicit;
        else
            throw ConfigError("[solver].startup", where(ln) + "expected scheme_ghost or explicit");
    }
    if (has("solver.galerkin")) {
        const auto& [v, ln] = require("solver.galerkin");
        if (v != "true" && v != "false")
            throw ConfigError("[solver].galerkin", where(ln) + "expected true or false");
        cfg.solver.galerkin = v == "true";
    }
    if (has("solver.galerkin_modes")) {
        get_int("solver.galerkin_modes", cfg.solver.galerkin_modes);
        if (cfg.solver.galerkin_modes < 1)
            throw ConfigError("[solver].galerkin_modes", where(line_of("solver.galerkin_modes")) + "must be >= 1");
    }

    ProbeSettings& p = cfg.probes;
    if (has("probes.enabled")) {
        static const std::set<std::string> known{"energy",       "weak_momentum", "local_energy", "renormalized",
                                                 "stress_jump",  "velocity_jump", "zero_trace",   "dissipation"};
        const auto& [v, ln] = require("probes.enabled");
        p.enabled = detail::split_list(v);
        for (const auto& name : p.enabled)
            if (!known.count(name))
                throw ConfigError("[probes].enabled", where(ln) + "unknown probe '" + name + "'");
    }
    auto opt_positive = [&](const std::string& id, double& out) {
        if (!has(id))
            return;
        get_double(id, out);
        if (!(out > 0.0))
            throw ConfigError(field_name(id), where(line_of(id)) + "must be > 0");
    };
    opt_positive("probes.tol_energy", p.tol_energy);
    opt_positive("probes.tol_renorm", p.tol_renorm);
    opt_positive("probes.tol_stress", p.tol_stress);
    opt_positive("probes.tol_velocity", p.tol_velocity);
    opt_positive("probes.stress_delta_dx", p.stress_delta_dx);
    if (has("probes.velocity_window")) {
        get_doubles("probes.velocity_window", p.velocity_window);
        if (p.velocity_window.size() != 2 || !(p.velocity_window[0] < p.velocity_window[1]))
            throw ConfigError("[probes].velocity_window", where(line_of("probes.velocity_window")) + "expected x0, x1 with x0 < x1");
    }
    if (has("probes.velocity_deltas_dt")) {
        get_doubles("probes.velocity_deltas_dt", p.velocity_deltas_dt);
        if (p.velocity_deltas_dt.empty())
            throw ConfigError("[probes].velocity_deltas_dt", where(line_of("probes.velocity_deltas_dt")) + "empty list");
    }
    if (has("probes.omega_dx")) {
        get_doubles("probes.omega_dx", p.omega_dx);
        if (p.omega_dx.empty())
            throw ConfigError("[probes].omega_dx", where(line_of("probes.omega_dx")) + "empty list");
    }

    // Domain checks on the physical part; the stride default is applied later.
    SimConfig check = cfg.sim;
    check.output_stride = cfg.stride();
    if (cfg.output.stride < 0)
        throw ConfigError("[output].stride", where(line_of("output.stride")) + "must be >= 1");
    SimConfig validated;
    try {
        validated = validate_config(check);
    } catch (const ConfigError& e) {
        // Re-raise with the line of the offending key when it was given.
        const std::string& f = e.field();
        const auto close = f.find("].");
        const std::string id = close == std::string::npos || f.empty() ? std::string()
                                                                        : f.substr(1, close - 1) + "." + f.substr(close + 2);
        std::string msg = e.what();
        if (msg.rfind(f + ": ", 0) == 0)
            msg.erase(0, f.size() + 2);
        if (!id.empty() && has(id))
            throw ConfigError(f, where(line_of(id)) + msg);
        throw;
    }
    cfg.sim.boundary_left = validated.boundary_left;
    cfg.sim.boundary_right = validated.boundary_right;
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

/// Serializes a configuration so that parse_config reproduces it exactly.
inline std::string emit_config(const RunConfig& cfg)
{
    using detail::fmt_double;
    std::ostringstream o;
    o << "[grid]\nl = " << fmt_double(cfg.sim.grid.length_l) << "\nn = " << cfg.sim.grid.cells_n << "\n\n";
    o << "[time]\nT = " << fmt_double(cfg.sim.time.horizon_T) << "\nm = " << cfg.sim.time.steps_m << "\n\n";
    o << "[physics]\nalpha = " << fmt_double(cfg.sim.physics.alpha)
      << "\nepsilon = " << fmt_double(cfg.sim.physics.epsilon) << "\n\n";
    o << "[init]\nkind = " << init_kind_name(cfg.sim.init) << "\n";
    if (const auto* m = std::get_if<SingleMode>(&cfg.sim.init))
        o << "amplitude = " << fmt_double(m->amplitude) << "\nmode = " << m->mode
          << "\noffset = " << fmt_double(m->offset) << "\nv0 = " << fmt_double(m->v0) << "\n";
    if (std::holds_alternative<Tabulated>(cfg.sim.init))
        o << "file = " << cfg.init_file << "\n";
    o << "\n[output]\n";
    if (cfg.output.stride > 0)
        o << "stride = " << cfg.output.stride << "\n";
    o << "dir = " << cfg.output.dir << "\n";
    o << "formats = " << (cfg.output.formats.empty() ? std::string("none") : detail::join_strings(cfg.output.formats))
      << "\n";
    if (!cfg.output.snapshots.empty())
        o << "snapshots = " << detail::join_doubles(cfg.output.snapshots) << "\n";
    o << "\n[solver]\nstartup = " << (cfg.solver.startup == Startup::SchemeGhost ? "scheme_ghost" : "explicit")
      << "\ngalerkin = " << (cfg.solver.galerkin ? "true" : "false") << "\ngalerkin_modes = " << cfg.solver.galerkin_modes
      << "\n\n";
    const ProbeSettings& p = cfg.probes;
    o << "[probes]\nenabled = " << detail::join_strings(p.enabled) << "\ntol_energy = " << fmt_double(p.tol_energy)
      << "\ntol_renorm = " << fmt_double(p.tol_renorm) << "\ntol_stress = " << fmt_double(p.tol_stress)
      << "\ntol_velocity = " << fmt_double(p.tol_velocity) << "\nstress_delta_dx = " << fmt_double(p.stress_delta_dx)
      << "\nvelocity_window = " << detail::join_doubles(p.velocity_window)
      << "\nvelocity_deltas_dt = " << detail::join_doubles(p.velocity_deltas_dt)
      << "\nomega_dx = " << detail::join_doubles(p.omega_dx) << "\n";
    return o.str();
}

} // namespace obstring::io
