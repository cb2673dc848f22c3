#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace vitalcep {

// Flat key=value configuration, keys namespaced with dots
// (window.ms, filter.ecg.low_hz, ...). '#' starts a comment.
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);  // throws ConfigError
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;
    void set(const std::string& key, std::string value);

    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace vitalcep
