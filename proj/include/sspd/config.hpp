#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace sspd::cli {

/// Flat key = value configuration with dotted keys ("detector.tau_ns").
///
/// Format: one `key = value` pair per line, '#' starts a comment, blank
/// lines ignored. Keys for physical quantities carry their unit as a suffix
/// (_ns, _nm, _uA, _cps, _fraction, ...). Duplicate keys are an error.
///
/// Reads are tracked: after an experiment has consumed its keys,
/// check_all_consumed() turns any leftover (= unknown) key into a hard
/// ConfigError naming it, so typos cannot silently fall back to defaults.
class ConfigMap {
public:
    ConfigMap() = default;

    /// Parses a config file. Throws IoError if unreadable, ConfigError on
    /// malformed lines or duplicate keys.
    static ConfigMap from_file(const std::filesystem::path& path);

    /// Parses config text (same format).
    static ConfigMap from_string(const std::string& text);

    /// Applies a single "key=value" override (CLI --set).
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;

    /// Typed getters; the _or variants return the fallback when the key is
    /// absent. Marks the key consumed.
    std::string get_string(const std::string& key);
    std::string get_string_or(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key);
    double get_double_or(const std::string& key, double fallback);
    std::int64_t get_int(const std::string& key);
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback);
    bool get_bool_or(const std::string& key, bool fallback);
    /// Comma-separated list of doubles.
    std::vector<double> get_double_list_or(const std::string& key,
                                           const std::vector<double>& fallback);
    /// Comma-separated list of strings (trimmed).
    std::vector<std::string> get_string_list_or(
        const std::string& key, const std::vector<std::string>& fallback);

    /// Throws ConfigError listing every key never consumed by a getter.
    void check_all_consumed() const;

    /// Canonical "key = value" text, keys sorted; parsing it back yields an
    /// equal map (round-trip invariant).
    std::string serialize() const;

    /// FNV-1a 64-bit hash of the canonical serialization, as fixed-width hex.
    std::string hash() const;

    bool operator==(const ConfigMap& other) const { return kv_ == other.kv_; }

private:
    void insert_line(const std::string& line, int lineno);

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> consumed_;
};

} // namespace sspd::cli
