#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apiknow {

/// Executed-branch feedback written by the execution harness.
///
///     #total_branches<TAB>42
///     <test_id><TAB><branch> <branch> ...
///
/// Blank lines and other lines starting with '#' are ignored. Branch ids
/// contain no whitespace.
struct CoverageFeedback {
  std::optional<std::int64_t> total_branches;
  std::map<std::string, std::vector<std::string>> covered; // sorted, unique branches

  /// Declared total, or the number of distinct branches seen when absent.
  std::int64_t branch_universe() const;
  /// Fraction of the universe covered by the given tests (unknown ids add nothing).
  double coverage_of(const std::vector<std::string>& test_ids) const;
  std::size_t branches_covered_by(const std::vector<std::string>& test_ids) const;
};

/// Throws Error(parse) naming the 1-based line on a missing tab, an empty
/// test id, a duplicate test id or a malformed header.
CoverageFeedback parse_feedback(std::string_view text);
CoverageFeedback load_feedback(const std::filesystem::path& path);

/// Canonical rendering: header (when known), then tests by id, branches sorted.
std::string format_feedback(const CoverageFeedback& feedback);

} // namespace apiknow
