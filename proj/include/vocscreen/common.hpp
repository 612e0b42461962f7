#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vocscreen {

inline constexpr const char* kVersion = "0.1.0";

// Base class for all toolkit errors. Specific categories below let callers
// map failures onto CLI exit codes (config vs estimation).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input: malformed files, unknown columns, invalid flags.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numerical/estimation failure at runtime (rank deficiency, saturation, EM collapse).
class EstimationError : public Error {
public:
    explicit EstimationError(const std::string& msg) : Error(msg) {}
};

// FNV-1a 64-bit, used for content digests in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Shortest round-trip decimal rendering of a double (std::to_chars).
std::string render_double(double v);

// Strict double parse; the whole token must be consumed.
bool parse_double(std::string_view token, double& out);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace vocscreen
