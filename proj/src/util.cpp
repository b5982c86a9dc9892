#include "apiknow/util.hpp"

#include "apiknow/error.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace apiknow {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::persistence: return "persistence error";
  case ErrorKind::parse: return "parse error";
  case ErrorKind::invariant: return "invariant violation";
  case ErrorKind::framework_mismatch: return "framework mismatch";
  case ErrorKind::duplicate_api: return "duplicate api";
  case ErrorKind::generation: return "generation error";
  case ErrorKind::usage: return "usage error";
  case ErrorKind::io: return "i/o error";
  }
  return "error";
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) noexcept {
  std::uint64_t hash = seed;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string to_hex(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> logger = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
    auto made = std::make_shared<spdlog::logger>("apiknow", sink);
    made->set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("APIKNOW_LOG"); env != nullptr && *env != '\0') {
      level = spdlog::level::from_str(env);
    }
    made->set_level(level);
    return made;
  }();
  return *logger;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::io, "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io, "cannot write " + path.string());
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error(ErrorKind::io, "short write to " + path.string());
  }
}

std::string trim(std::string_view text) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == sep) {
      parts.emplace_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string simple_name(std::string_view dotted) {
  auto pos = dotted.rfind('.');
  return std::string(pos == std::string_view::npos ? dotted : dotted.substr(pos + 1));
}

std::string parent_name(std::string_view dotted) {
  auto pos = dotted.rfind('.');
  return pos == std::string_view::npos ? std::string() : std::string(dotted.substr(0, pos));
}

} // namespace apiknow
