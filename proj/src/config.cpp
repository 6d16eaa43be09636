#include "sspd/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sspd/errors.hpp"
#include "sspd/rng.hpp"

namespace sspd::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

void check_key(const std::string& key) {
    if (key.empty()) throw ConfigError("config: empty key");
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            throw ConfigError("config: invalid character '" + std::string(1, c) +
                              "' in key '" + key + "'");
    }
}

} // namespace

ConfigMap ConfigMap::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return from_string(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

ConfigMap ConfigMap::from_string(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        cfg.insert_line(line, lineno);
    }
    return cfg;
}

void ConfigMap::insert_line(const std::string& raw, int lineno) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) +
                          ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    check_key(key);
    if (value.empty())
        throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                          "' has no value");
    if (kv_.count(key))
        throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                          key + "'");
    kv_[key] = value;
}

void ConfigMap::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    check_key(key);
    if (value.empty())
        throw ConfigError("--set: key '" + key + "' has no value");
    kv_[key] = value; // overrides may replace existing keys
}

bool ConfigMap::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string ConfigMap::get_string(const std::string& key) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
    consumed_.insert(key);
    return it->second;
}

std::string ConfigMap::get_string_or(const std::string& key,
                                     const std::string& fallback) {
    consumed_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key) {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': cannot parse '" + v +
                          "' as a number");
    }
}

double ConfigMap::get_double_or(const std::string& key, double fallback) {
    if (!has(key)) {
        consumed_.insert(key);
        return fallback;
    }
    return get_double(key);
}

std::int64_t ConfigMap::get_int(const std::string& key) {
    const std::string v = get_string(key);
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        // Allow scientific/decimal notation for counts (e.g. 1e6).
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size() || d != std::floor(d) || std::abs(d) > 9.2e18)
                throw std::invalid_argument(v);
            return static_cast<std::int64_t>(d);
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "': cannot parse '" + v +
                              "' as an integer");
        }
    }
    return out;
}

std::int64_t ConfigMap::get_int_or(const std::string& key, std::int64_t fallback) {
    if (!has(key)) {
        consumed_.insert(key);
        return fallback;
    }
    return get_int(key);
}

bool ConfigMap::get_bool_or(const std::string& key, bool fallback) {
    if (!has(key)) {
        consumed_.insert(key);
        return fallback;
    }
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: key '" + key + "': cannot parse '" + v +
                      "' as a boolean");
}

std::vector<double> ConfigMap::get_double_list_or(
    const std::string& key, const std::vector<double>& fallback) {
    if (!has(key)) {
        consumed_.insert(key);
        return fallback;
    }
    const std::string v = get_string(key);
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            const double d = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(d);
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "': cannot parse list item '" +
                              item + "' as a number");
        }
    }
    if (out.empty())
        throw ConfigError("config: key '" + key + "': empty list");
    return out;
}

std::vector<std::string> ConfigMap::get_string_list_or(
    const std::string& key, const std::vector<std::string>& fallback) {
    if (!has(key)) {
        consumed_.insert(key);
        return fallback;
    }
    const std::string v = get_string(key);
    std::vector<std::string> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty())
        throw ConfigError("config: key '" + key + "': empty list");
    return out;
}

void ConfigMap::check_all_consumed() const {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : kv_)
        if (!consumed_.count(key)) unknown.push_back(key);
    if (!unknown.empty()) {
        std::string msg = "config: unknown key";
        if (unknown.size() > 1) msg += 's';
        msg += ": ";
        for (std::size_t i = 0; i < unknown.size(); ++i) {
            if (i) msg += ", ";
            msg += "'" + unknown[i] + "'";
        }
        throw ConfigError(msg);
    }
}

std::string ConfigMap::serialize() const {
    std::ostringstream out;
    for (const auto& [key, value] : kv_) out << key << " = " << value << "\n";
    return out.str();
}

std::string ConfigMap::hash() const {
    const std::uint64_t h = rng::fnv1a64(serialize());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace sspd::cli
