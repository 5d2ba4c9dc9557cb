#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace p2ad {

// Flat "key = value" text config with '#' comments. Lookups record the
// key as known; finish() rejects leftovers so typos fail loudly instead
// of silently using defaults.
class KeyValueConfig {
public:
    KeyValueConfig() = default;
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    double get_double(const std::string& key, double fallback);
    bool get_bool(const std::string& key, bool fallback);

    // Throws ContractError listing any key never looked up.
    void finish() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> seen_;
};

}  // namespace p2ad
