#pragma once

#include "apiknow/code_scan.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace apiknow {

/// Exact non-negative rational, used for confidences and thresholds.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Parses "0.5", "2/3", "1".
  static Fraction parse(std::string_view text);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  Fraction reduced() const noexcept;

  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) noexcept;
  friend bool operator==(const Fraction& a, const Fraction& b) noexcept { return (a <=> b) == 0; }
};

std::string to_string(const Fraction& f);

struct Transaction {
  std::string source_id;
  std::vector<std::string> apis; // first-occurrence order, no duplicates

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

using Itemset = std::vector<std::string>; // sorted, unique

struct UsageRule {
  Itemset antecedent;
  std::string consequent;
  std::int64_t support_count = 0;      // transactions containing antecedent + consequent
  std::int64_t antecedent_support = 0; // transactions containing antecedent
  Fraction confidence() const noexcept { return Fraction{support_count, antecedent_support}; }

  friend bool operator==(const UsageRule&, const UsageRule&) = default;
};

struct RankedConsequent {
  std::string api_id;
  Fraction confidence;
  std::int64_t support_count = 0;

  friend bool operator==(const RankedConsequent&, const RankedConsequent&) = default;
};

/// Antecedent set -> consequents, confidence descending (ties: higher
/// support, then api id).
struct PatternIndex {
  std::map<Itemset, std::vector<RankedConsequent>> by_antecedent;

  const std::vector<RankedConsequent>* find(const Itemset& antecedent) const;
  bool empty() const noexcept { return by_antecedent.empty(); }
  std::size_t rule_count() const noexcept;

  friend bool operator==(const PatternIndex&, const PatternIndex&) = default;
};

/// Known-API calls in textual order (duplicates kept).
std::vector<std::string> extract_api_calls(std::string_view code_text, const code::ApiCatalog& known);

struct Post {
  std::string source_id;
  std::vector<std::string> fragments;
};

std::vector<Transaction> build_transactions(const std::vector<Post>& posts, const code::ApiCatalog& known);

std::map<Itemset, std::int64_t> mine_frequent_itemsets(const std::vector<Transaction>& transactions,
                                                       std::int64_t min_support);

/// Single-consequent rules from frequent itemsets; confidence compared exactly.
std::vector<UsageRule> derive_rules(const std::map<Itemset, std::int64_t>& itemsets, Fraction min_confidence,
                                    std::int64_t min_support = 1);

PatternIndex build_pattern_index(const std::vector<UsageRule>& rules);

/// Transactions file: "source_id<TAB>api,api,..." per line.
std::vector<Transaction> load_transactions(const std::filesystem::path& path);
std::vector<Transaction> parse_transactions(std::string_view text);
std::string format_transactions(const std::vector<Transaction>& transactions);

struct PatternFile {
  std::int64_t min_support = 2;
  Fraction min_confidence{1, 2};
  std::vector<UsageRule> rules;
};

nlohmann::ordered_json patterns_to_json(const PatternFile& file);
PatternFile patterns_from_json(const nlohmann::ordered_json& json);
void save_patterns(const PatternFile& file, const std::filesystem::path& path);
PatternFile load_patterns(const std::filesystem::path& path);

} // namespace apiknow
