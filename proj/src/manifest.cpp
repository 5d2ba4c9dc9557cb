#include "p2ad/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "p2ad/errors.hpp"

namespace p2ad {

void RunManifest::add(const std::string& key, const std::string& value) {
    config.emplace_back(key, value);
}

void RunManifest::add(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    config.emplace_back(key, buf);
}

void RunManifest::add(const std::string& key, std::int64_t value) {
    config.emplace_back(key, std::to_string(value));
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [key, value] : config) cfg[key] = value;
    j["config"] = std::move(cfg);
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["duration_seconds"] = duration_seconds;
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
    atomic_write_file(path, to_json());
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    const std::filesystem::path target(path);
    const std::filesystem::path dir =
        target.has_parent_path() ? target.parent_path() : ".";
    const std::filesystem::path tmp =
        dir / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FileError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw FileError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw FileError("rename failed: " + target.string() + ": " + ec.message());
    }
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path);
    char buf[1 << 16];
    std::uint64_t h = seed;
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

std::string to_hex(std::uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace p2ad
