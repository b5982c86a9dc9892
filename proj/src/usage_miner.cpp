#include "apiknow/usage_miner.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>

namespace apiknow {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Fraction

Fraction Fraction::parse(std::string_view raw) {
  std::string text = trim(raw);
  auto fail = [&]() -> Fraction { throw Error(ErrorKind::usage, "not a fraction: '" + text + "'"); };
  auto parse_int = [&](std::string_view digits) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || v < 0) fail();
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string::npos) {
    Fraction f{parse_int(std::string_view(text).substr(0, slash)), parse_int(std::string_view(text).substr(slash + 1))};
    if (f.den == 0) fail();
    return f.reduced();
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Fraction{parse_int(text), 1};
  std::string whole = text.substr(0, dot);
  std::string frac = text.substr(dot + 1);
  if (frac.size() > 15) fail();
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  std::int64_t num = (whole.empty() ? 0 : parse_int(whole)) * den + (frac.empty() ? 0 : parse_int(frac));
  return Fraction{num, den}.reduced();
}

Fraction Fraction::reduced() const noexcept {
  auto g = std::gcd(num, den);
  if (g == 0) return *this;
  return Fraction{num / g, den / g};
}

std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) noexcept {
  __int128 lhs = static_cast<__int128>(a.num) * b.den;
  __int128 rhs = static_cast<__int128>(b.num) * a.den;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string to_string(const Fraction& f) {
  auto r = f.reduced();
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

// ---------------------------------------------------------------------------
// extraction

std::vector<std::string> extract_api_calls(std::string_view code_text, const code::ApiCatalog& known) {
  std::vector<std::string> out;
  try {
    auto scanned = code::scan(code_text, known);
    for (const auto& call : scanned.calls) out.push_back(call.api_id);
  } catch (const Error& e) {
    log().debug("fragment skipped: {}", e.what());
  }
  return out;
}

std::vector<Transaction> build_transactions(const std::vector<Post>& posts, const code::ApiCatalog& known) {
  std::vector<Transaction> out;
  for (const auto& post : posts) {
    Transaction t{post.source_id, {}};
    std::set<std::string> seen;
    for (const auto& fragment : post.fragments) {
      for (auto& api : extract_api_calls(fragment, known)) {
        if (seen.insert(api).second) t.apis.push_back(std::move(api));
      }
    }
    if (!t.apis.empty()) out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Apriori

std::map<Itemset, std::int64_t> mine_frequent_itemsets(const std::vector<Transaction>& transactions,
                                                       std::int64_t min_support) {
  if (min_support < 1) throw Error(ErrorKind::usage, "min_support must be >= 1");
  std::map<Itemset, std::int64_t> result;

  // transactions as sorted item-index sets
  std::vector<std::string> items;
  {
    std::set<std::string> all;
    for (const auto& t : transactions) all.insert(t.apis.begin(), t.apis.end());
    items.assign(all.begin(), all.end());
  }
  auto index_of = [&](const std::string& api) {
    return static_cast<int>(std::lower_bound(items.begin(), items.end(), api) - items.begin());
  };
  std::vector<std::vector<int>> baskets;
  for (const auto& t : transactions) {
    std::vector<int> basket;
    for (const auto& api : t.apis) basket.push_back(index_of(api));
    std::sort(basket.begin(), basket.end());
    basket.erase(std::unique(basket.begin(), basket.end()), basket.end());
    baskets.push_back(std::move(basket));
  }

  auto count = [&](const std::vector<int>& candidate) {
    std::int64_t n = 0;
    for (const auto& basket : baskets) {
      if (std::includes(basket.begin(), basket.end(), candidate.begin(), candidate.end())) ++n;
    }
    return n;
  };
  auto record = [&](const std::vector<int>& set, std::int64_t support) {
    Itemset names;
    for (int i : set) names.push_back(items[static_cast<std::size_t>(i)]);
    result.emplace(std::move(names), support);
  };

  std::vector<std::vector<int>> level;
  for (int i = 0; i < static_cast<int>(items.size()); ++i) {
    std::vector<int> single{i};
    auto support = count(single);
    if (support >= min_support) {
      record(single, support);
      level.push_back(single);
    }
  }
  while (level.size() > 1) {
    std::set<std::vector<int>> frequent(level.begin(), level.end());
    std::vector<std::vector<int>> next;
    for (std::size_t a = 0; a < level.size(); ++a) {
      for (std::size_t b = a + 1; b < level.size(); ++b) {
        const auto& x = level[a];
        const auto& y = level[b];
        if (!std::equal(x.begin(), x.end() - 1, y.begin())) continue; // share k-1 prefix
        std::vector<int> candidate = x;
        candidate.push_back(y.back());
        std::sort(candidate.end() - 2, candidate.end());
        // downward closure: every k-subset must be frequent
        bool closed = true;
        for (std::size_t drop = 0; drop < candidate.size() && closed; ++drop) {
          std::vector<int> subset;
          for (std::size_t k = 0; k < candidate.size(); ++k) {
            if (k != drop) subset.push_back(candidate[k]);
          }
          closed = frequent.count(subset) > 0;
        }
        if (!closed) continue;
        auto support = count(candidate);
        if (support >= min_support) {
          record(candidate, support);
          next.push_back(std::move(candidate));
        }
      }
    }
    std::sort(next.begin(), next.end());
    level = std::move(next);
  }
  return result;
}

std::vector<UsageRule> derive_rules(const std::map<Itemset, std::int64_t>& itemsets, Fraction min_confidence,
                                    std::int64_t min_support) {
  std::vector<UsageRule> rules;
  for (const auto& [itemset, support] : itemsets) {
    if (itemset.size() < 2 || support < min_support) continue;
    for (std::size_t i = 0; i < itemset.size(); ++i) {
      Itemset antecedent;
      for (std::size_t k = 0; k < itemset.size(); ++k) {
        if (k != i) antecedent.push_back(itemset[k]);
      }
      auto it = itemsets.find(antecedent);
      if (it == itemsets.end()) continue; // cannot happen for Apriori output
      UsageRule rule{antecedent, itemset[i], support, it->second};
      if (rule.confidence() >= min_confidence) rules.push_back(std::move(rule));
    }
  }
  return rules;
}

const std::vector<RankedConsequent>* PatternIndex::find(const Itemset& antecedent) const {
  auto it = by_antecedent.find(antecedent);
  return it == by_antecedent.end() ? nullptr : &it->second;
}

std::size_t PatternIndex::rule_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [a, list] : by_antecedent) n += list.size();
  return n;
}

PatternIndex build_pattern_index(const std::vector<UsageRule>& rules) {
  PatternIndex index;
  for (const auto& rule : rules) {
    Itemset key = rule.antecedent;
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    index.by_antecedent[key].push_back({rule.consequent, rule.confidence().reduced(), rule.support_count});
  }
  for (auto& [key, list] : index.by_antecedent) {
    std::sort(list.begin(), list.end(), [](const RankedConsequent& a, const RankedConsequent& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      if (a.support_count != b.support_count) return a.support_count > b.support_count;
      return a.api_id < b.api_id;
    });
  }
  return index;
}

// ---------------------------------------------------------------------------
// files

std::vector<Transaction> parse_transactions(std::string_view text) {
  std::vector<Transaction> out;
  std::size_t line_no = 0;
  for (const auto& raw_line : split(text, '\n')) {
    ++line_no;
    std::string line = raw_line;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorKind::parse, "transactions line " + std::to_string(line_no) + ": missing tab");
    }
    Transaction t;
    t.source_id = trim(std::string_view(line).substr(0, tab));
    if (t.source_id.empty()) {
      throw Error(ErrorKind::parse, "transactions line " + std::to_string(line_no) + ": empty source id");
    }
    std::set<std::string> seen;
    for (const auto& part : split(std::string_view(line).substr(tab + 1), ',')) {
      std::string api = trim(part);
      if (!api.empty() && seen.insert(api).second) t.apis.push_back(api);
    }
    if (t.apis.empty()) {
      throw Error(ErrorKind::parse, "transactions line " + std::to_string(line_no) + ": no apis");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Transaction> load_transactions(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing transactions file " + path.string());
  return parse_transactions(read_file(path));
}

std::string format_transactions(const std::vector<Transaction>& transactions) {
  std::string out;
  for (const auto& t : transactions) out += t.source_id + "\t" + join(t.apis, ",") + "\n";
  return out;
}

json patterns_to_json(const PatternFile& file) {
  json rules = json::array();
  for (const auto& r : file.rules) {
    rules.push_back(json{{"antecedent", r.antecedent},
                         {"consequent", r.consequent},
                         {"support", r.support_count},
                         {"antecedent_support", r.antecedent_support},
                         {"confidence", r.confidence().value()}});
  }
  return json{{"format", "apiknow-patterns/1"},
              {"min_support", file.min_support},
              {"min_confidence", to_string(file.min_confidence)},
              {"rules", std::move(rules)}};
}

PatternFile patterns_from_json(const json& j) {
  PatternFile file;
  try {
    file.min_support = j.at("min_support").get<std::int64_t>();
    const auto& mc = j.at("min_confidence");
    file.min_confidence = mc.is_string() ? Fraction::parse(mc.get<std::string>())
                                         : Fraction::parse(std::to_string(mc.get<double>()));
    for (const auto& r : j.at("rules")) {
      UsageRule rule;
      rule.antecedent = r.at("antecedent").get<Itemset>();
      std::sort(rule.antecedent.begin(), rule.antecedent.end());
      rule.consequent = r.at("consequent").get<std::string>();
      rule.support_count = r.at("support").get<std::int64_t>();
      rule.antecedent_support = r.at("antecedent_support").get<std::int64_t>();
      if (rule.antecedent.empty() || rule.antecedent_support < rule.support_count || rule.support_count < 1 ||
          std::find(rule.antecedent.begin(), rule.antecedent.end(), rule.consequent) != rule.antecedent.end()) {
        throw Error(ErrorKind::invariant, "malformed usage rule for " + rule.consequent);
      }
      file.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed patterns file: ") + e.what());
  }
  return file;
}

void save_patterns(const PatternFile& file, const std::filesystem::path& path) {
  write_file(path, patterns_to_json(file).dump(2) + "\n");
}

PatternFile load_patterns(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing patterns file " + path.string());
  try {
    return patterns_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

} // namespace apiknow
