#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace bcva {

/// Environment variables BCVA_SET_<SECTION>__<KEY>=value mirror --set section.key=value.
inline constexpr const char* env_override_prefix = "BCVA_SET_";

/// Flat "section.key = value" configuration over a fixed key registry.
class KeyValueConfig {
public:
    /// Every known key with its default value.
    static KeyValueConfig defaults();

    void load_file(const std::string& path);
    void load_text(const std::string& text, const std::string& source);
    /// Throws ConfigError for keys outside the registry.
    void set(const std::string& key, const std::string& value);
    /// Parses "key=value".
    void apply_override(const std::string& assignment);
    void apply_env(const std::map<std::string, std::string>& env);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::size_t get_size(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::size_t> get_sizes(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    /// Sorted "key = value" lines.
    std::string canonical() const;
    /// FNV-1a 64-bit hash of canonical(), as 16 hex digits.
    std::string hash() const;

private:
    std::map<std::string, std::string> values_;
};

/// BCVA_SET_LIMIT__SIGMA_STAR -> limit.sigma_star; empty if the prefix is absent.
std::string env_name_to_key(const std::string& env_name);

} // namespace bcva
