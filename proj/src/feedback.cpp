#include "apiknow/feedback.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace apiknow {

std::int64_t CoverageFeedback::branch_universe() const {
  if (total_branches) return *total_branches;
  std::set<std::string_view> all;
  for (const auto& [id, branches] : covered) all.insert(branches.begin(), branches.end());
  return static_cast<std::int64_t>(all.size());
}

std::size_t CoverageFeedback::branches_covered_by(const std::vector<std::string>& test_ids) const {
  std::set<std::string_view> hit;
  for (const auto& id : test_ids) {
    if (auto it = covered.find(id); it != covered.end()) hit.insert(it->second.begin(), it->second.end());
  }
  return hit.size();
}

double CoverageFeedback::coverage_of(const std::vector<std::string>& test_ids) const {
  auto universe = branch_universe();
  if (universe <= 0) return 0.0;
  return static_cast<double>(branches_covered_by(test_ids)) / static_cast<double>(universe);
}

CoverageFeedback parse_feedback(std::string_view text) {
  CoverageFeedback feedback;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::parse, "feedback line " + std::to_string(line_no) + ": " + what);
  };
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (line.front() == '#') {
      if (line.starts_with("#total_branches")) {
        if (tab == std::string::npos) fail("missing tab after #total_branches");
        std::string digits = trim(std::string_view(line).substr(tab + 1));
        std::int64_t total = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), total);
        if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || total < 0) {
          fail("malformed total '" + digits + "'");
        }
        feedback.total_branches = total;
      }
      continue;
    }
    if (tab == std::string::npos) fail("missing tab");
    std::string id = trim(std::string_view(line).substr(0, tab));
    if (id.empty()) fail("empty test id");
    if (feedback.covered.count(id)) fail("duplicate test id " + id);
    std::set<std::string> branches;
    for (const auto& b : split(std::string_view(line).substr(tab + 1), ' ')) {
      auto branch = trim(b);
      if (!branch.empty()) branches.insert(branch);
    }
    feedback.covered[id].assign(branches.begin(), branches.end());
  }
  return feedback;
}

CoverageFeedback load_feedback(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing feedback file " + path.string());
  return parse_feedback(read_file(path));
}

std::string format_feedback(const CoverageFeedback& feedback) {
  std::string out;
  if (feedback.total_branches) out += "#total_branches\t" + std::to_string(*feedback.total_branches) + "\n";
  for (const auto& [id, branches] : feedback.covered) {
    std::vector<std::string> sorted(branches);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    out += id + "\t" + join(sorted, " ") + "\n";
  }
  return out;
}

} // namespace apiknow
