#pragma once

#include "apiknow/usage_miner.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

/// Straight transcription of the call-sequence selection loop, working on a
/// flat rule list instead of the index.
struct Alg1Scenario {
  std::vector<std::string> sequence;
  std::vector<std::string> candidates;
  std::vector<apiknow::UsageRule> rules;
  std::vector<std::string> fallback;
};

struct Alg1Match {
  std::string api;
  apiknow::Fraction confidence;
  std::int64_t support = 0;
  std::size_t suffix_length = 0;
};

inline std::vector<Alg1Match> priority_set(const Alg1Scenario& s) {
  std::vector<Alg1Match> out;
  for (const auto& c : s.candidates) {
    std::vector<std::string> m = s.sequence;
    while (m.size() > 1) {
      std::set<std::string> apis(m.begin(), m.end());
      std::optional<Alg1Match> hit;
      for (const auto& r : s.rules) {
        std::set<std::string> ante(r.antecedent.begin(), r.antecedent.end());
        if (r.consequent == c && ante == apis) {
          Alg1Match cand{c, r.confidence(), r.support_count, m.size()};
          if (!hit || cand.confidence > hit->confidence ||
              (cand.confidence == hit->confidence && cand.support > hit->support)) {
            hit = cand;
          }
        }
      }
      if (hit) {
        out.push_back(*hit);
        break;
      }
      m.erase(m.begin());
    }
  }
  return out;
}

inline std::string reference_next_method(const Alg1Scenario& s) {
  auto priority = priority_set(s);
  if (!priority.empty()) {
    std::sort(priority.begin(), priority.end(), [](const Alg1Match& a, const Alg1Match& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      if (a.support != b.support) return a.support > b.support;
      return a.api < b.api;
    });
    return priority.front().api;
  }
  for (const auto& f : s.fallback) {
    if (std::find(s.candidates.begin(), s.candidates.end(), f) != s.candidates.end()) return f;
  }
  return s.candidates.front();
}

inline Alg1Scenario random_scenario(std::mt19937_64& gen) {
  static const std::vector<std::string> apis = {"KMeans", "fit", "predict", "score", "transform", "load"};
  auto below = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); };
  Alg1Scenario s;
  std::size_t length = below(6);
  for (std::size_t i = 0; i < length; ++i) s.sequence.push_back(apis[below(apis.size())]);
  std::vector<std::string> pool = apis;
  std::shuffle(pool.begin(), pool.end(), gen);
  pool.resize(1 + below(4));
  s.candidates = pool;
  s.fallback = apis;
  std::shuffle(s.fallback.begin(), s.fallback.end(), gen);
  std::size_t n_rules = below(8);
  for (std::size_t r = 0; r < n_rules; ++r) {
    apiknow::UsageRule rule;
    // bias antecedents towards suffixes of the sequence so matches are common
    if (!s.sequence.empty() && below(3) != 0) {
      std::size_t start = below(s.sequence.size());
      std::set<std::string> items(s.sequence.begin() + static_cast<std::ptrdiff_t>(start), s.sequence.end());
      rule.antecedent.assign(items.begin(), items.end());
    } else {
      std::set<std::string> items;
      std::size_t k = 1 + below(3);
      while (items.size() < k) items.insert(apis[below(apis.size())]);
      rule.antecedent.assign(items.begin(), items.end());
    }
    rule.consequent = below(2) ? s.candidates[below(s.candidates.size())] : apis[below(apis.size())];
    if (std::find(rule.antecedent.begin(), rule.antecedent.end(), rule.consequent) != rule.antecedent.end()) continue;
    rule.antecedent_support = static_cast<std::int64_t>(2 + below(9));
    rule.support_count = static_cast<std::int64_t>(1 + below(static_cast<std::size_t>(rule.antecedent_support)));
    bool duplicate = false;
    for (const auto& other : s.rules) {
      if (other.antecedent == rule.antecedent && other.consequent == rule.consequent) duplicate = true;
    }
    if (!duplicate) s.rules.push_back(rule);
  }
  return s;
}

} // namespace oracle
