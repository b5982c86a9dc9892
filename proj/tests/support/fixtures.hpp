#pragma once

#include "apiknow/api_model.hpp"
#include "apiknow/doc_miner.hpp"
#include "apiknow/usage_miner.hpp"
#include "apiknow/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <random>
#include <string>
#include <vector>

namespace fixture {

inline std::filesystem::path data_dir() { return APIKNOW_DATA_DIR; }
inline std::filesystem::path path(const std::string& name) { return data_dir() / "fixture" / name; }

inline const apiknow::KnowledgeBase& kb() {
  static const apiknow::KnowledgeBase kb = apiknow::build_kb(apiknow::load_doc_corpus(path("docs.json")), "sklearn", "1.2");
  return kb;
}

inline const std::vector<apiknow::UsageRule>& rules() {
  static const std::vector<apiknow::UsageRule> rules = [] {
    auto tx = apiknow::load_transactions(path("transactions.tsv"));
    return apiknow::derive_rules(apiknow::mine_frequent_itemsets(tx, 2), apiknow::Fraction{1, 2}, 2);
  }();
  return rules;
}

inline const apiknow::PatternIndex& patterns() {
  static const apiknow::PatternIndex index = apiknow::build_pattern_index(rules());
  return index;
}

struct LabeledSentence {
  std::string sentence;
  apiknow::ParamConstraint expected;
};

/// Labels use the KB constraint encoding without provenance; every labeled
/// field is taken as read from the parametric page.
inline std::vector<LabeledSentence> labeled_sentences() {
  auto doc = nlohmann::ordered_json::parse(apiknow::read_file(path("labeled_sentences.json")));
  std::vector<LabeledSentence> out;
  for (const auto& row : doc) {
    nlohmann::ordered_json fields = nlohmann::ordered_json::object();
    for (const char* name : {"structure", "data_type", "default_value", "shape", "size", "dimension",
                             "allowed_values", "optional"}) {
      fields[name] = "undefined";
    }
    for (const auto& [name, value] : row.at("fields").items()) {
      fields[name] = {{"value", value}, {"provenance", "parametric-page"}};
    }
    out.push_back({row.at("sentence").get<std::string>(), apiknow::constraint_from_json(fields)});
  }
  return out;
}

/// Per-field agreement between a labeled and a mined constraint, over the
/// fields defined in either.
struct FieldScore {
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::string> mismatches;
};

inline void score_fields(const apiknow::ParamConstraint& want, const apiknow::ParamConstraint& got,
                         const std::string& sentence, FieldScore& score) {
  auto one = [&](const char* name, const auto& a, const auto& b) {
    if (!a.defined() && !b.defined()) return;
    ++score.total;
    if (a.value == b.value) {
      ++score.correct;
    } else {
      score.mismatches.push_back(sentence + " [" + name + "]");
    }
  };
  one("structure", want.structure, got.structure);
  one("data_type", want.data_type, got.data_type);
  one("default_value", want.default_value, got.default_value);
  one("shape", want.shape, got.shape);
  one("size", want.size, got.size);
  one("dimension", want.dimension, got.dimension);
  one("allowed_values", want.allowed_values, got.allowed_values);
  one("optional", want.optional, got.optional);
}

} // namespace fixture

namespace oracle {

/// Frequent itemsets by enumerating every subset of the item universe.
inline std::map<apiknow::Itemset, std::int64_t> brute_force_itemsets(
    const std::vector<apiknow::Transaction>& transactions, std::int64_t min_support) {
  std::set<std::string> universe_set;
  for (const auto& t : transactions) universe_set.insert(t.apis.begin(), t.apis.end());
  std::vector<std::string> universe(universe_set.begin(), universe_set.end());
  std::map<apiknow::Itemset, std::int64_t> out;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << universe.size()); ++mask) {
    apiknow::Itemset items;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (mask & (std::uint64_t{1} << i)) items.push_back(universe[i]);
    }
    std::int64_t count = 0;
    for (const auto& t : transactions) {
      bool all = true;
      for (const auto& item : items) {
        if (std::find(t.apis.begin(), t.apis.end(), item) == t.apis.end()) all = false;
      }
      count += all ? 1 : 0;
    }
    if (count >= min_support) out[items] = count;
  }
  return out;
}

/// Every single-consequent rule X => c over frequent X+c, kept when
/// supp(X+c) * den >= num * supp(X).
inline std::vector<apiknow::UsageRule> brute_force_rules(const std::map<apiknow::Itemset, std::int64_t>& itemsets,
                                                         apiknow::Fraction min_confidence) {
  std::vector<apiknow::UsageRule> out;
  for (const auto& [items, support] : itemsets) {
    if (items.size() < 2) continue;
    for (std::size_t i = 0; i < items.size(); ++i) {
      apiknow::Itemset antecedent;
      for (std::size_t j = 0; j < items.size(); ++j) {
        if (j != i) antecedent.push_back(items[j]);
      }
      std::int64_t ante = itemsets.at(antecedent);
      if (static_cast<__int128>(support) * min_confidence.den >= static_cast<__int128>(min_confidence.num) * ante) {
        out.push_back({antecedent, items[i], support, ante});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.antecedent, a.consequent) < std::tie(b.antecedent, b.consequent);
  });
  return out;
}

inline std::vector<apiknow::Transaction> random_corpus(std::mt19937_64& gen, std::size_t max_tx = 10,
                                                       std::size_t max_items = 6) {
  std::uniform_int_distribution<std::size_t> n_tx(0, max_tx), n_items(1, max_items);
  std::size_t items = n_items(gen);
  std::vector<apiknow::Transaction> out;
  std::size_t count = n_tx(gen);
  for (std::size_t t = 0; t < count; ++t) {
    apiknow::Transaction tx{"t" + std::to_string(t), {}};
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < items; ++i) pool.push_back(std::string(1, static_cast<char>('A' + i)));
    std::shuffle(pool.begin(), pool.end(), gen);
    std::uniform_int_distribution<std::size_t> take(1, items);
    pool.resize(take(gen));
    tx.apis = pool;
    out.push_back(std::move(tx));
  }
  return out;
}

} // namespace oracle
