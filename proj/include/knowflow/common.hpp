#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace knowflow {

// Base error for all data/processing failures. Messages are meant to be
// printed to the user as-is, so they carry file names and line numbers
// where applicable.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration (missing input path, bad flag value). The CLI maps
// this to a distinct exit status.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// FNV-1a 64-bit. Used for input digests in the run manifest and for
// deriving per-subject-category sampling sub-seeds.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL) {
    std::uint64_t h = basis;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace knowflow
