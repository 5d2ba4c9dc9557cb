#include "p2ad/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "p2ad/errors.hpp"

namespace p2ad {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_string(buf.str());
    } catch (const ContractError& e) {
        throw ContractError(path + ": " + e.what());
    }
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ContractError("line " + std::to_string(lineno) +
                                ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ContractError("line " + std::to_string(lineno) + ": empty key");
        if (!cfg.values_.emplace(key, value).second)
            throw ContractError("line " + std::to_string(lineno) +
                                ": duplicate key " + key);
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
    return values_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) {
    seen_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::int64_t KeyValueConfig::get_int(const std::string& key,
                                     std::int64_t fallback) {
    seen_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    const long long v = std::strtoll(it->second.c_str(), &end, 0);
    if (end == it->second.c_str() || *end != '\0')
        throw ContractError(key + ": not an integer: " + it->second);
    return v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) {
    seen_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw ContractError(key + ": not a number: " + it->second);
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
    seen_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ContractError(key + ": not a boolean: " + v);
}

void KeyValueConfig::finish() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (!seen_.count(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += key;
        }
    }
    if (!unknown.empty())
        throw ContractError("unknown config keys: " + unknown);
}

}  // namespace p2ad
