#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <spdlog/logger.h>

namespace apiknow {

/// FNV-1a 64-bit. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string to_hex(std::uint64_t value);

/// Shared logger; level from the APIKNOW_LOG environment variable
/// (trace, debug, info, warn, error, off). Defaults to warn.
spdlog::logger& log();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Last component of a dotted name ("a.b.C" -> "C").
std::string simple_name(std::string_view dotted);
/// Everything before the last dot, empty if there is none.
std::string parent_name(std::string_view dotted);

} // namespace apiknow
