#include "apiknow/doc_miner.hpp"

#include "apiknow/util.hpp"

#include <algorithm>
#include <functional>
#include <regex>

namespace apiknow {

const char* to_string(FieldKind kind) noexcept {
  switch (kind) {
  case FieldKind::structure: return "structure";
  case FieldKind::data_type: return "data_type";
  case FieldKind::default_value: return "default_value";
  case FieldKind::shape: return "shape";
  case FieldKind::size: return "size";
  case FieldKind::dimension: return "dimension";
  case FieldKind::allowed_values: return "allowed_values";
  case FieldKind::optional: return "optional";
  }
  return "?";
}

std::string normalize_sentence(std::string_view raw) {
  // typographic quotes and LaTeX-style quoting to ASCII
  static const std::pair<std::string_view, std::string_view> replacements[] = {
      {"\xE2\x80\x98", "'"}, {"\xE2\x80\x99", "'"}, {"\xE2\x80\x9C", "\""}, {"\xE2\x80\x9D", "\""},
      {"\xE2\x80\xA6", "..."}, {"\xC2\xA0", " "},   {"``", "\""},           {"''", "\""},
      {"`", "'"},
  };
  std::string text;
  text.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    bool replaced = false;
    for (const auto& [from, to] : replacements) {
      if (raw.substr(i, from.size()) == from) {
        text += to;
        i += from.size();
        replaced = true;
        break;
      }
    }
    if (replaced) continue;
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (c < 0x20 || c == 0x7f) {
      text += (c == '\t' || c == '\n' || c == '\r') ? ' ' : '\0';
      if (text.back() == '\0') text.pop_back();
    } else {
      text += static_cast<char>(c);
    }
    ++i;
  }
  std::string collapsed;
  for (char c : text) {
    if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
    collapsed += c;
  }
  std::string out = trim(collapsed);
  auto noise = [](char c) { return c == ';' || c == ',' || c == ':' || c == '-' || c == '*' || c == ' '; };
  while (!out.empty() && noise(out.front())) out.erase(out.begin());
  while (!out.empty() && (noise(out.back()) || (out.back() == '.' && !out.ends_with("...")))) out.pop_back();
  return out;
}

namespace {

using Extractor = std::function<void(const std::string& body, ParamConstraint&)>;

struct CompiledRule {
  LinguisticRuleInfo info;
  std::regex pattern;
  Extractor extract;
};

const std::string kDt =
    "(?:integers|integer|ints|int|floats|float|strings|string|str|booleans|boolean|bools|bool)(?![\\w-])";
const std::string kSt =
    "(?:array-like|array_like|arrays|array|ndarray|sparse matrices|sparse matrix|matrices|matrix|lists|list|"
    "tuples|tuple|sets|set|dictionary|dict|sequences|sequence)(?![\\w-])";
const std::string kVal =
    "(?:'[^']*'|\"[^\"]*\"|None|True|False|-?\\d+(?:\\.\\d*)?(?:e[-+]?\\d+)?|-?\\.\\d+(?:e[-+]?\\d+)?)(?![\\w])";
const std::string kShape = "\\([^()]*\\)";
const std::string kDefault = "default(?:s to)?\\s*[=:]?\\s*";
const std::string kPrefix = "^((?:[A-Za-z_]\\w*\\s*:\\s*)?)";
const std::string kEnd = "(?=$|[\\s.,;)])";

constexpr auto kFlags = std::regex::ECMAScript | std::regex::icase;

std::optional<Structure> structure_word(std::string word) {
  std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
  if (word.starts_with("sparse")) return Structure::sparse_matrix;
  if (word.starts_with("array") || word == "ndarray" || word.starts_with("matri")) return Structure::array_like;
  if (word.starts_with("list")) return Structure::list;
  if (word.starts_with("tuple")) return Structure::tuple;
  if (word.starts_with("set")) return Structure::set;
  if (word.starts_with("dict")) return Structure::dict;
  if (word.starts_with("sequence")) return Structure::sequence;
  return std::nullopt;
}

std::optional<DataType> dtype_word(std::string word) {
  std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
  if (word.starts_with("int")) return DataType::integer;
  if (word.starts_with("float")) return DataType::floating;
  if (word.starts_with("str")) return DataType::string;
  if (word.starts_with("bool")) return DataType::boolean;
  return std::nullopt;
}

template <class T, class Map>
std::vector<T> find_all(const std::string& text, const std::string& word_pattern, Map&& map) {
  static thread_local std::map<std::string, std::regex> cache;
  auto it = cache.find(word_pattern);
  if (it == cache.end()) it = cache.emplace(word_pattern, std::regex("(?:^|[^\\w-])(" + word_pattern + ")", kFlags)).first;
  std::vector<T> out;
  for (auto m = std::sregex_iterator(text.begin(), text.end(), it->second); m != std::sregex_iterator(); ++m) {
    if (auto v = map((*m)[1].str()); v && std::find(out.begin(), out.end(), *v) == out.end()) out.push_back(*v);
  }
  return out;
}

std::vector<Structure> structures_in(const std::string& text) {
  return find_all<Structure>(text, kSt, structure_word);
}

std::vector<DataType> dtypes_in(const std::string& text) {
  return find_all<DataType>(text, kDt, dtype_word);
}

std::vector<Literal> values_in(const std::string& text) {
  static const std::regex re("(" + kVal + ")", kFlags);
  std::vector<Literal> out;
  for (auto m = std::sregex_iterator(text.begin(), text.end(), re); m != std::sregex_iterator(); ++m) {
    std::string token = (*m)[1].str();
    std::string lower = token;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "none") token = "None";
    if (lower == "true") token = "True";
    if (lower == "false") token = "False";
    Literal lit = parse_literal(token);
    if (std::find(out.begin(), out.end(), lit) == out.end()) out.push_back(lit);
  }
  return out;
}

std::vector<ShapeSpec> shapes_in(const std::string& text) {
  static const std::regex re(kShape);
  std::vector<ShapeSpec> out;
  for (auto m = std::sregex_iterator(text.begin(), text.end(), re); m != std::sregex_iterator(); ++m) {
    std::string inner = m->str();
    inner = inner.substr(1, inner.size() - 2);
    ShapeSpec shape;
    for (const auto& part : split(inner, ',')) {
      std::string dim = trim(part);
      if (dim.empty()) continue;
      if (std::all_of(dim.begin(), dim.end(), [](unsigned char c) { return std::isdigit(c); })) {
        shape.dims.emplace_back(static_cast<std::int64_t>(std::stoll(dim)));
      } else {
        shape.dims.emplace_back(dim);
      }
    }
    if (!shape.dims.empty()) out.push_back(std::move(shape));
  }
  return out;
}

/// Splits `body` at the default marker: returns (before, default literal).
std::pair<std::string, std::optional<Literal>> split_default(const std::string& body) {
  static const std::regex re(kDefault + "(" + kVal + ")", kFlags);
  std::smatch m;
  if (!std::regex_search(body, m, re)) return {body, std::nullopt};
  auto values = values_in(m[1].str());
  return {body.substr(0, static_cast<std::size_t>(m.position(0))),
          values.empty() ? std::nullopt : std::optional<Literal>(values.front())};
}

constexpr Provenance kPage = Provenance::parametric_page;

DataType literal_type(const Literal& lit) {
  switch (tag_of(lit)) {
  case LiteralTag::boolean: return DataType::boolean;
  case LiteralTag::integer: return DataType::integer;
  case LiteralTag::floating: return DataType::floating;
  default: return DataType::string;
  }
}

void set_default(ParamConstraint& c, const std::optional<Literal>& d) {
  if (d) c.default_value.set(*d, kPage);
}

// dtype(s) then "or <value>": the value's own type joins the alternatives
void dtype_or_value(const std::string& text, ParamConstraint& c) {
  auto types = dtypes_in(text);
  auto values = values_in(text);
  for (const auto& v : values) {
    if (tag_of(v) == LiteralTag::none) continue;
    auto t = literal_type(v);
    if (std::find(types.begin(), types.end(), t) == types.end()) types.push_back(t);
  }
  c.data_type.set(types, kPage);
  if (!values.empty()) c.allowed_values.set(values, kPage);
}

std::vector<CompiledRule> compile_rules() {
  using F = FieldKind;
  std::vector<CompiledRule> rules;
  auto add = [&](int id, std::string tmpl, std::vector<F> yields, std::string example, std::string regex,
                 Extractor extract) {
    rules.push_back({{id, std::move(tmpl), std::move(yields), std::move(example)},
                     std::regex(kPrefix + regex + kEnd, kFlags), std::move(extract)});
  };
  add(1, "<D_type> default=<value>", {F::data_type, F::default_value}, "int default=0",
      kDt + "(?:\\s*,\\s*" + kDt + ")*(?:\\s*,?\\s+or\\s+" + kDt + ")?\\s*,?\\s*" + kDefault + kVal,
      [](const std::string& body, ParamConstraint& c) {
        auto [head, d] = split_default(body);
        c.data_type.set(dtypes_in(head), kPage);
        set_default(c, d);
      });
  add(2, "<D_type> or <D_type>", {F::data_type}, "int or float",
      kDt + "(?:\\s*,\\s*" + kDt + ")*\\s*,?\\s+or\\s+" + kDt, [](const std::string& body, ParamConstraint& c) {
        c.data_type.set(dtypes_in(body), kPage);
      });
  add(3, "<Structure> of shape <(shape)>, default=<value>", {F::structure, F::shape, F::default_value},
      "array-like of shape (n_samples,n_features), default=None",
      kSt + "\\s+of\\s+shape\\s*" + kShape + "(?:\\s*,?\\s*" + kDefault + kVal + ")?",
      [](const std::string& body, ParamConstraint& c) {
        auto [head, d] = split_default(body);
        auto of = head.find(" of ");
        c.structure.set(structures_in(head.substr(0, of)), kPage);
        c.shape.set(shapes_in(head), kPage);
        set_default(c, d);
      });
  add(4, "<Structure_Enum> of shape <(shape)>, default=<value>", {F::structure, F::shape, F::default_value},
      "{array-like, sparse matrix} of shape (n_samples, n_features), default=None",
      "\\{\\s*" + kSt + "(?:\\s*,\\s*" + kSt + ")*\\s*\\}\\s*of\\s+shape\\s*" + kShape + "(?:\\s*,?\\s*" + kDefault +
          kVal + ")?",
      [](const std::string& body, ParamConstraint& c) {
        auto [head, d] = split_default(body);
        auto close = head.find('}');
        c.structure.set(structures_in(head.substr(0, close)), kPage);
        c.shape.set(shapes_in(head.substr(close)), kPage);
        set_default(c, d);
      });
  add(5, "<Structure> of shape <(shape)> or <(shape)>", {F::structure, F::shape},
      "array-like of shape (n_samples,n_features) or (n_samples,)",
      kSt + "\\s+of\\s+shape\\s*" + kShape + "\\s+or\\s+" + kShape, [](const std::string& body, ParamConstraint& c) {
        auto of = body.find(" of ");
        c.structure.set(structures_in(body.substr(0, of)), kPage);
        c.shape.set(shapes_in(body), kPage);
      });
  add(6, "<D_type>/<structure>", {F::structure, F::data_type}, "params: dict",
      "(?:" + kDt + "|" + kSt + ")(?:\\s*/\\s*(?:" + kDt + "|" + kSt + "))?(?:\\s*,?\\s*" + kDefault + kVal + ")?",
      [](const std::string& body, ParamConstraint& c) {
        auto [head, d] = split_default(body);
        auto types = dtypes_in(head);
        auto structures = structures_in(head);
        if (!types.empty()) c.data_type.set(types, kPage);
        if (!structures.empty()) c.structure.set(structures, kPage);
        set_default(c, d);
      });
  add(7, "{Structure_Enum}", {F::structure}, "{list, tuple, set}",
      "\\{\\s*" + kSt + "(?:\\s*,\\s*" + kSt + ")*\\s*\\}", [](const std::string& body, ParamConstraint& c) {
        c.structure.set(structures_in(body), kPage);
      });
  add(8, "{Values_Enum} default=<value>", {F::allowed_values, F::default_value},
      "{'text', 'diagram'}, default=None",
      "\\{\\s*" + kVal + "(?:\\s*,\\s*" + kVal + ")*\\s*\\}\\s*,?\\s*" + kDefault + kVal,
      [](const std::string& body, ParamConstraint& c) {
        auto [head, d] = split_default(body);
        c.allowed_values.set(values_in(head), kPage);
        set_default(c, d);
      });
  add(9, "{Values_Enum}", {F::allowed_values}, "{'text', 'diagram'}",
      "\\{\\s*" + kVal + "(?:\\s*,\\s*" + kVal + ")*\\s*\\}", [](const std::string& body, ParamConstraint& c) {
        c.allowed_values.set(values_in(body), kPage);
      });
  add(10, "<Size>-length {Structure_Enum}", {F::size, F::structure}, "2-length sequence (tuple, list, ...)",
      "(\\d+)\\s*-?\\s*length\\s+" + kSt + "(?:\\s*\\(\\s*" + kSt + "(?:\\s*,\\s*" + kSt +
          ")*(?:\\s*,\\s*(?:\\.\\.\\.|etc\\.?))?\\s*\\))?",
      [](const std::string& body, ParamConstraint& c) {
        static const std::regex size_re("(\\d+)");
        std::smatch m;
        std::regex_search(body, m, size_re);
        c.size.set(std::stoll(m[1].str()), kPage);
        c.structure.set(structures_in(body), kPage);
      });
  add(11, "<Dimension>d <structure>", {F::dimension, F::structure}, "2d Array",
      "(\\d+)\\s*-?\\s*d\\s+" + kSt, [](const std::string& body, ParamConstraint& c) {
        static const std::regex dim_re("(\\d+)");
        std::smatch m;
        std::regex_search(body, m, dim_re);
        c.dimension.set(std::stoll(m[1].str()), kPage);
        c.structure.set(structures_in(body), kPage);
      });
  add(12, "<value> (def), <value>, ... or <value>", {F::default_value, F::allowed_values},
      "'backward' (default), 'forward', or 'nearest'",
      kVal + "\\s*\\((?:def|default)\\)(?:\\s*,\\s*" + kVal + ")*\\s*,?\\s*(?:or\\s+" + kVal + ")?",
      [](const std::string& body, ParamConstraint& c) {
        auto values = values_in(body);
        auto marker = body.find('(');
        auto first = values_in(body.substr(0, marker));
        if (!first.empty()) c.default_value.set(first.back(), kPage);
        c.allowed_values.set(values, kPage);
      });
  add(13, "<Structure> of <D_type>", {F::structure, F::data_type}, "tuple of ints",
      kSt + "\\s+of\\s+" + kDt, [](const std::string& body, ParamConstraint& c) {
        auto of = body.find(" of ");
        c.structure.set(structures_in(body.substr(0, of)), kPage);
        c.data_type.set(dtypes_in(body.substr(of)), kPage);
      });
  add(14, "<value> or <value>", {F::allowed_values}, "None or \"sequence\"", kVal + "\\s+or\\s+" + kVal,
      [](const std::string& body, ParamConstraint& c) { c.allowed_values.set(values_in(body), kPage); });
  add(15, "<D_type>, optional", {F::data_type, F::optional}, "(int,optional)",
      "\\(?\\s*" + kDt + "\\s*,\\s*optional\\s*\\)?", [](const std::string& body, ParamConstraint& c) {
        c.data_type.set(dtypes_in(body), kPage);
        c.optional.set(true, kPage);
      });
  add(16, "<Structure>, optional", {F::structure, F::optional}, "(array-like,optional)",
      "\\(?\\s*" + kSt + "\\s*,\\s*optional\\s*\\)?", [](const std::string& body, ParamConstraint& c) {
        c.structure.set(structures_in(body), kPage);
        c.optional.set(true, kPage);
      });
  add(17, "<D_type> or <value>", {F::data_type, F::allowed_values}, "int or \"all\"",
      kDt + "\\s+or\\s+" + kVal, dtype_or_value);
  add(18, "<D_type> or <value> default=<value>", {F::data_type, F::allowed_values, F::default_value},
      "int or \"all\", default=10", kDt + "\\s+or\\s+" + kVal + "\\s*,?\\s*" + kDefault + kVal,
      [](const std::string& body, ParamConstraint& c) {
        auto [head, d] = split_default(body);
        dtype_or_value(head, c);
        set_default(c, d);
      });
  return rules;
}

const std::vector<CompiledRule>& compiled_rules() {
  static const std::vector<CompiledRule> rules = compile_rules();
  return rules;
}

} // namespace

const std::vector<LinguisticRuleInfo>& linguistic_rules() {
  static const std::vector<LinguisticRuleInfo> infos = [] {
    std::vector<LinguisticRuleInfo> out;
    for (const auto& r : compiled_rules()) out.push_back(r.info);
    return out;
  }();
  return infos;
}

RuleMatch apply_rules_detailed(std::string_view normalized) {
  const std::string text(normalized);
  RuleMatch best;
  const CompiledRule* winner = nullptr;
  std::smatch winner_match;
  for (const auto& rule : compiled_rules()) {
    std::smatch m;
    if (!std::regex_search(text, m, rule.pattern)) continue;
    auto length = static_cast<std::size_t>(m.length(0));
    if (length > best.length) { // strict: ties keep the lower rule id
      best.length = length;
      best.rule_id = rule.info.rule_id;
      winner = &rule;
      winner_match = m;
    }
  }
  if (winner != nullptr) {
    std::string matched = winner_match.str(0);
    std::string body = matched.substr(static_cast<std::size_t>(winner_match.length(1)));
    winner->extract(body, best.constraint);
  }
  return best;
}

ParamConstraint apply_rules(std::string_view normalized) {
  return apply_rules_detailed(normalized).constraint;
}

ParamConstraint mine_param_doc(std::string_view raw) {
  // sentence boundaries: ". " before an uppercase letter, or a line break
  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    bool boundary = false;
    if (c == '\n') {
      boundary = true;
    } else if (c == '.' && i + 2 < raw.size() && raw[i + 1] == ' ' &&
               std::isupper(static_cast<unsigned char>(raw[i + 2])) && !(i >= 1 && raw[i - 1] == '.')) {
      current += c;
      boundary = true;
    }
    if (boundary) {
      sentences.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  sentences.push_back(current);
  for (const auto& sentence : sentences) {
    auto normalized = normalize_sentence(sentence);
    if (normalized.empty()) continue;
    auto match = apply_rules_detailed(normalized);
    if (match.rule_id != 0) return match.constraint;
  }
  return {};
}

} // namespace apiknow
