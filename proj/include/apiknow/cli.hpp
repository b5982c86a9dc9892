#pragma once

#include "apiknow/feedback.hpp"
#include "apiknow/oracle.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace apiknow {

/// Process exit codes; each failure class has its own diagnostic.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 2,         // unknown subcommand or flag, bad flag value
  exit_missing_input = 3, // input file or directory absent / unreadable
  exit_schema = 4,        // input present but malformed or inconsistent
  exit_failure = 5,       // generation or other runtime failure
};

/// Result of `check` for one suite.
struct CheckSummary {
  std::string label;
  std::string target;
  std::string backend;
  std::uint64_t seed = 0;
  std::size_t tests = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
  double proxy = 0.0;
  std::vector<std::string> test_ids;
  std::vector<Violation> violations;

  double invalid_rate() const noexcept { return tests == 0 ? 0.0 : static_cast<double>(invalid) / tests; }
};

CheckSummary summarize_suite(const TestSuite& suite, const KnowledgeBase& kb, const PatternIndex& patterns,
                             std::string label = {});

nlohmann::ordered_json check_to_json(const CheckSummary& summary);
CheckSummary check_from_json(const nlohmann::ordered_json& json);

/// Table with one row per configuration; the first row is the baseline for
/// the improvement column, which appears only with feedback.
std::string render_report(const std::vector<CheckSummary>& checks, const CoverageFeedback* feedback = nullptr);

/// Runs one subcommand (argv[0] is the program name). Diagnostics go to `err`.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

} // namespace apiknow
