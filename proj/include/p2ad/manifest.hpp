#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace p2ad {

inline constexpr const char* kToolVersion = "1.0.0";

// Record of one CLI run: the subcommand, every resolved config value,
// seeds, paths, and wall-clock duration. Each run writes exactly one
// manifest next to its outputs.
struct RunManifest {
    std::string subcommand;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> config;  // resolved values
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;

    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void add(const std::string& key, std::int64_t value);

    std::string to_json() const;
    void write(const std::string& path) const;
};

// Writes via a temporary file in the same directory plus rename, so
// partially written outputs are never observed.
void atomic_write_file(const std::string& path, const std::string& contents);

// FNV-1a 64 over a byte buffer / a file's bytes.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const std::string& path, std::uint64_t seed);

std::string to_hex(std::uint64_t value);

}  // namespace p2ad
