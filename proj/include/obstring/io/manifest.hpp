#pragma once

// Run manifest: configuration snapshot, produced files with FNV-1a checksums
// and wall-clock time per phase, serialized as manifest.json.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "obstring/io/csv.hpp"

namespace obstring::io {

/// 64-bit FNV-1a. Not cryptographic; it only has to detect accidental change.
inline std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct ManifestFile {
    std::string name; ///< relative to the output directory
    std::uint64_t bytes = 0;
    std::string checksum;
};

struct PhaseTiming {
    std::string name;
    double seconds = 0.0;
};

struct SnapshotRecord {
    double requested = 0.0;
    double actual = 0.0;
};

struct RunManifest {
    std::string config_text;
    std::string solver = "fd"; ///< "fd" or "fd+galerkin"
    std::filesystem::path output_dir;
    std::vector<ManifestFile> files;
    std::vector<PhaseTiming> phases;
    std::vector<SnapshotRecord> snapshots;

    /// Writes `content` to output_dir/name and records it.
    void add_file(const std::string& name, const std::string& content)
    {
        write_text(output_dir / name, content);
        files.push_back({name, content.size(), hex64(fnv1a64(content))});
    }

    /// Records a file written by someone else.
    void record_file(const std::filesystem::path& path)
    {
        const std::string content = read_text(path);
        files.push_back({std::filesystem::relative(path, output_dir).generic_string(), content.size(),
                         hex64(fnv1a64(content))});
    }

    bool lists(std::string_view name) const
    {
        for (const auto& f : files)
            if (f.name == name)
                return true;
        return false;
    }

    /// True when every listed file exists and still matches its checksum.
    bool verify() const
    {
        for (const auto& f : files) {
            const auto p = output_dir / f.name;
            if (!std::filesystem::exists(p))
                return false;
            if (hex64(fnv1a64(read_text(p))) != f.checksum)
                return false;
        }
        return true;
    }

    nlohmann::json to_json() const
    {
        nlohmann::json j;
        j["config"] = config_text;
        j["solver"] = solver;
        j["output_dir"] = output_dir.generic_string();
        j["files"] = nlohmann::json::array();
        for (const auto& f : files)
            j["files"].push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a64", f.checksum}});
        j["phases"] = nlohmann::json::array();
        for (const auto& p : phases)
            j["phases"].push_back({{"name", p.name}, {"seconds", p.seconds}});
        j["snapshots"] = nlohmann::json::array();
        for (const auto& s : snapshots)
            j["snapshots"].push_back({{"requested", s.requested}, {"actual", s.actual}});
        return j;
    }

    void write() const { write_text(output_dir / "manifest.json", to_json().dump(2) + "\n"); }

    static RunManifest from_json(const nlohmann::json& j, const std::filesystem::path& dir)
    {
        RunManifest m;
        m.config_text = j.at("config").get<std::string>();
        m.solver = j.at("solver").get<std::string>();
        m.output_dir = dir;
        for (const auto& f : j.at("files"))
            m.files.push_back({f.at("name").get<std::string>(), f.at("bytes").get<std::uint64_t>(),
                               f.at("fnv1a64").get<std::string>()});
        for (const auto& p : j.at("phases"))
            m.phases.push_back({p.at("name").get<std::string>(), p.at("seconds").get<double>()});
        for (const auto& s : j.at("snapshots"))
            m.snapshots.push_back({s.at("requested").get<double>(), s.at("actual").get<double>()});
        return m;
    }
};

/// Measures one named phase into a manifest.
class PhaseTimer {
public:
    PhaseTimer(RunManifest& m, std::string name) : manifest_(m), name_(std::move(name)), start_(clock::now()) {}
    PhaseTimer(const PhaseTimer&) = delete;
    PhaseTimer& operator=(const PhaseTimer&) = delete;
    ~PhaseTimer() { manifest_.phases.push_back({name_, std::chrono::duration<double>(clock::now() - start_).count()}); }

private:
    using clock = std::chrono::steady_clock;
    RunManifest& manifest_;
    std::string name_;
    clock::time_point start_;
};

} // namespace obstring::io
