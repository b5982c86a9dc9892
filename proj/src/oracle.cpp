#include "apiknow/oracle.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace apiknow {

using json = nlohmann::ordered_json;

const char* to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::dtype: return "dtype";
    case ViolationKind::structure: return "structure";
    case ViolationKind::shape: return "shape";
    case ViolationKind::size: return "size";
    case ViolationKind::dimension: return "dimension";
    case ViolationKind::allowed_value: return "allowed-value";
    case ViolationKind::missing_required: return "missing-required";
  }
  return "?";
}

std::optional<ViolationKind> parse_violation_kind(std::string_view text) noexcept {
  for (auto k : {ViolationKind::dtype, ViolationKind::structure, ViolationKind::shape, ViolationKind::size,
                 ViolationKind::dimension, ViolationKind::allowed_value, ViolationKind::missing_required}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

bool literal_equal(const Literal& a, const Literal& b) {
  const auto* ai = std::get_if<std::int64_t>(&a);
  const auto* bi = std::get_if<std::int64_t>(&b);
  const auto* ad = std::get_if<double>(&a);
  const auto* bd = std::get_if<double>(&b);
  if (ai && bd) return static_cast<double>(*ai) == *bd;
  if (ad && bi) return *ad == static_cast<double>(*bi);
  return a == b;
}

bool in_allowed(const Literal& lit, const std::vector<Literal>& allowed) {
  return std::any_of(allowed.begin(), allowed.end(), [&](const Literal& a) { return literal_equal(lit, a); });
}

std::optional<DataType> literal_type(const Literal& lit) {
  switch (tag_of(lit)) {
    case LiteralTag::boolean: return DataType::boolean;
    case LiteralTag::integer: return DataType::integer;
    case LiteralTag::floating: return DataType::floating;
    case LiteralTag::string: return DataType::string;
    default: return std::nullopt;
  }
}

bool has(const std::vector<DataType>& types, DataType t) {
  return std::find(types.begin(), types.end(), t) != types.end();
}

bool type_ok(const Literal& lit, const std::vector<DataType>& types) {
  if (std::holds_alternative<ExprLiteral>(lit)) return true;
  auto t = literal_type(lit);
  if (!t) return false;
  if (has(types, *t)) return true;
  return *t == DataType::integer && has(types, DataType::floating);
}

template <class T>
std::string list_of(const std::vector<T>& items) {
  std::vector<std::string> parts;
  for (const auto& item : items) {
    if constexpr (std::is_same_v<T, Literal>) {
      parts.push_back(describe(item));
    } else if constexpr (std::is_same_v<T, ShapeSpec>) {
      parts.push_back(item.to_string());
    } else {
      parts.push_back(to_string(item));
    }
  }
  return "[" + join(parts, ", ") + "]";
}

bool structure_accepts(const std::vector<Structure>& allowed, ValueKind kind) {
  auto any = [&](std::initializer_list<Structure> options) {
    return std::any_of(options.begin(), options.end(), [&](Structure s) {
      return std::find(allowed.begin(), allowed.end(), s) != allowed.end();
    });
  };
  switch (kind) {
    case ValueKind::scalar: return any({Structure::scalar});
    case ValueKind::list: return any({Structure::list, Structure::sequence, Structure::array_like});
    case ValueKind::tuple: return any({Structure::tuple, Structure::sequence, Structure::array_like});
    case ValueKind::array: return any({Structure::array_like, Structure::sequence});
    case ValueKind::set: return any({Structure::set});
    case ValueKind::dict: return any({Structure::dict});
    default: return false;
  }
}

bool unify(const std::vector<std::int64_t>& dims, const ShapeSpec& shape) {
  if (dims.size() != shape.dims.size()) return false;
  std::map<std::string, std::int64_t> binding;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (const auto* fixed = std::get_if<std::int64_t>(&shape.dims[i])) {
      if (*fixed != dims[i]) return false;
    } else {
      auto [it, inserted] = binding.emplace(std::get<std::string>(shape.dims[i]), dims[i]);
      if (!inserted && it->second != dims[i]) return false;
    }
  }
  return true;
}

std::string dims_text(const std::optional<std::vector<std::int64_t>>& dims) {
  if (!dims) return "ragged";
  std::vector<std::string> parts;
  for (auto d : *dims) parts.push_back(std::to_string(d));
  return "(" + join(parts, ", ") + (parts.size() == 1 ? ",)" : ")");
}

} // namespace

std::optional<ValueCheck> check_value(const Value& value, const ParamConstraint& c) {
  if (value.kind == ValueKind::opaque) return std::nullopt;
  if (value.is_scalar() && c.default_value.defined() && literal_equal(value.scalar, *c.default_value.value)) {
    return std::nullopt;
  }
  auto actual = describe(value);
  auto fail = [&](ViolationKind kind, std::string expected, std::string got) {
    return std::optional<ValueCheck>(ValueCheck{kind, std::move(expected), std::move(got)});
  };
  bool container_expected =
      (c.structure.defined() && std::any_of(c.structure.value->begin(), c.structure.value->end(),
                                            [](Structure s) { return s != Structure::scalar; })) ||
      c.shape.defined() || c.size.defined() || (c.dimension.defined() && *c.dimension.value > 0);

  if (c.data_type.defined()) {
    const auto& types = *c.data_type.value;
    auto expected = "dtype " + list_of(types);
    if (value.kind == ValueKind::object) return fail(ViolationKind::dtype, expected, actual);
    if (value.is_scalar()) {
      if (!type_ok(value.scalar, types)) return fail(ViolationKind::dtype, expected, actual);
    } else {
      if (!container_expected) return fail(ViolationKind::dtype, expected, actual);
      std::vector<const Literal*> leaves;
      collect_leaves(value, leaves);
      for (const auto* leaf : leaves) {
        if (!type_ok(*leaf, types)) return fail(ViolationKind::dtype, "elements of " + expected, actual);
      }
    }
  }

  if (c.structure.defined()) {
    if (!structure_accepts(*c.structure.value, value.kind)) {
      return fail(ViolationKind::structure, "structure " + list_of(*c.structure.value), actual);
    }
  }

  std::optional<std::vector<std::int64_t>> dims;
  if (c.dimension.defined() || c.shape.defined() || c.size.defined()) dims = dims_of(value);

  if (c.dimension.defined()) {
    auto expected = "dimension " + std::to_string(*c.dimension.value);
    if (!dims || static_cast<std::int64_t>(dims->size()) != *c.dimension.value) {
      return fail(ViolationKind::dimension, expected, "shape " + dims_text(dims));
    }
  }

  if (c.shape.defined()) {
    const auto& shapes = *c.shape.value;
    bool ok = dims && std::any_of(shapes.begin(), shapes.end(), [&](const ShapeSpec& s) { return unify(*dims, s); });
    if (!ok) return fail(ViolationKind::shape, "shape " + list_of(shapes), "shape " + dims_text(dims));
  }

  if (c.size.defined()) {
    if (!dims || dims->empty() || dims->front() != *c.size.value) {
      return fail(ViolationKind::size, "size " + std::to_string(*c.size.value), "shape " + dims_text(dims));
    }
  }

  if (c.allowed_values.defined()) {
    const auto& allowed = *c.allowed_values.value;
    auto expected = "one of " + list_of(allowed);
    if (!c.data_type.defined()) {
      // exhaustive
      if (!value.is_scalar() || !in_allowed(value.scalar, allowed)) {
        return fail(ViolationKind::allowed_value, expected, actual);
      }
    } else if (value.is_scalar()) {
      // type-scoped: only values sharing a type with some allowed literal are restricted
      auto t = literal_type(value.scalar);
      bool scoped = std::any_of(allowed.begin(), allowed.end(), [&](const Literal& a) {
        return tag_of(a) == tag_of(value.scalar) || (t && literal_type(a) == t);
      });
      if (scoped && !in_allowed(value.scalar, allowed)) return fail(ViolationKind::allowed_value, expected, actual);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// test verdicts

namespace {

std::map<int, Value> variable_values(const TestCase& test) {
  std::map<int, Value> vars;
  for (const auto& st : test.statements) {
    if (!st.target_var) continue;
    switch (st.kind) {
      case StatementKind::assign_literal: vars[*st.target_var] = st.literal; break;
      case StatementKind::construct: vars[*st.target_var] = Value::object(st.callee); break;
      default: vars[*st.target_var] = Value::opaque(); break;
    }
  }
  return vars;
}

/// Parameters reachable by position: those before the first variadic one.
std::vector<const ParamSpec*> positional_params(const ApiSpec& spec) {
  std::vector<const ParamSpec*> out;
  for (const auto& p : spec.params) {
    if (p.is_variadic) break;
    out.push_back(&p);
  }
  return out;
}

/// Arguments resolved against the callee's parameters.
struct Binding {
  std::map<std::string, const Arg*> by_param;
  std::vector<std::string> unknown;
};

Binding bind(const Statement& st, const ApiSpec& spec) {
  Binding b;
  auto positional = positional_params(spec);
  for (const auto& arg : st.args) {
    const ParamSpec* param = nullptr;
    if (const auto* pos = std::get_if<std::size_t>(&arg.binding)) {
      if (*pos < positional.size()) param = positional[*pos];
      if (!param) b.unknown.push_back("#" + std::to_string(*pos));
    } else {
      const auto& name = std::get<std::string>(arg.binding);
      param = spec.find_param(name);
      if (!param || param->is_variadic) {
        b.unknown.push_back(name);
        param = nullptr;
      }
    }
    if (param) b.by_param[param->name] = &arg;
  }
  return b;
}

Value resolve(const Arg& arg, const std::map<int, Value>& vars) {
  if (const auto* ref = std::get_if<VarRef>(&arg.value)) {
    auto it = vars.find(ref->id);
    return it == vars.end() ? Value::opaque() : it->second;
  }
  return std::get<Value>(arg.value);
}

bool is_call(const Statement& st) {
  return st.kind == StatementKind::construct || st.kind == StatementKind::call;
}

} // namespace

TestVerdict check_test(const TestCase& test, const KnowledgeBase& kb) {
  TestVerdict verdict;
  auto vars = variable_values(test);
  for (std::size_t i = 0; i < test.statements.size(); ++i) {
    const auto& st = test.statements[i];
    if (!is_call(st)) continue;
    const auto* entry = kb_lookup(kb, st.callee);
    if (!entry) {
      verdict.warnings.push_back("statement " + std::to_string(i) + ": " + st.callee + " is not in the knowledge base");
      continue;
    }
    auto binding = bind(st, entry->spec);
    for (const auto& name : binding.unknown) {
      verdict.warnings.push_back("statement " + std::to_string(i) + ": " + st.callee + " has no parameter " + name);
    }
    for (const auto& param : entry->spec.params) {
      if (param.is_variadic) continue;
      auto it = binding.by_param.find(param.name);
      bool omitted = it == binding.by_param.end() || std::holds_alternative<UseDefault>(it->second->value);
      if (omitted) {
        if (param.is_required) {
          verdict.violations.push_back({test.id, i, st.callee, param.name, ViolationKind::missing_required,
                                        "required argument", "omitted"});
        }
        continue;
      }
      auto cit = entry->constraints.find(param.name);
      if (cit == entry->constraints.end()) continue;
      if (auto failure = check_value(resolve(*it->second, vars), cit->second)) {
        verdict.violations.push_back(
            {test.id, i, st.callee, param.name, failure->kind, failure->expected, failure->actual});
      }
    }
  }
  verdict.valid = verdict.violations.empty();
  return verdict;
}

// ---------------------------------------------------------------------------
// model coverage

ModelCoverage model_coverage(const TestSuite& suite, std::string_view target, const KnowledgeBase& kb,
                             const PatternIndex& patterns, const ProxyWeights& weights) {
  ModelCoverage cov;
  auto entries = target_entries(kb, target);
  std::set<std::string> target_ids;
  for (const auto* e : entries) {
    target_ids.insert(e->spec.api_id);
    std::size_t params = 0;
    for (const auto& p : e->spec.params) params += p.is_variadic ? 0 : 1;
    cov.total_pairs += std::max<std::size_t>(1, params);
  }
  cov.total_apis = target_ids.size();

  struct Rule {
    const Itemset* antecedent;
    std::string consequent;
  };
  std::vector<Rule> rules;
  for (const auto& [antecedent, list] : patterns.by_antecedent) {
    for (const auto& c : list) {
      if (target_ids.count(c.api_id)) rules.push_back({&antecedent, c.api_id});
    }
  }
  cov.relevant_rules = rules.size();

  std::set<std::pair<std::string, std::string>> pairs;
  std::set<std::string> called;
  std::set<std::size_t> exercised;
  for (const auto& test : suite.tests) {
    auto vars = variable_values(test);
    std::map<std::string, std::size_t> first_call;
    for (std::size_t i = 0; i < test.statements.size(); ++i) {
      const auto& st = test.statements[i];
      if (!is_call(st)) continue;
      first_call.emplace(st.callee, i);
      if (!target_ids.count(st.callee)) continue;
      called.insert(st.callee);
      const auto* entry = kb_lookup(kb, st.callee);
      auto binding = bind(st, entry->spec);
      bool any_param = false;
      for (const auto& param : entry->spec.params) {
        if (param.is_variadic) continue;
        any_param = true;
        auto it = binding.by_param.find(param.name);
        bool omitted = it == binding.by_param.end() || std::holds_alternative<UseDefault>(it->second->value);
        bool satisfied = false;
        if (omitted) {
          satisfied = !param.is_required;
        } else {
          auto cit = entry->constraints.find(param.name);
          satisfied = cit == entry->constraints.end() || !check_value(resolve(*it->second, vars), cit->second);
        }
        if (satisfied) pairs.emplace(st.callee, param.name);
      }
      if (!any_param) pairs.emplace(st.callee, "");
    }
    for (std::size_t r = 0; r < rules.size(); ++r) {
      if (exercised.count(r)) continue;
      // consequent called after every antecedent API
      for (std::size_t i = 0; i < test.statements.size(); ++i) {
        const auto& st = test.statements[i];
        if (!is_call(st) || st.callee != rules[r].consequent) continue;
        bool ordered = std::all_of(rules[r].antecedent->begin(), rules[r].antecedent->end(), [&](const auto& a) {
          auto it = first_call.find(a);
          return it != first_call.end() && it->second < i;
        });
        if (ordered) {
          exercised.insert(r);
          break;
        }
      }
    }
  }
  cov.covered_pairs = pairs.size();
  cov.distinct_apis = called.size();
  cov.rules_exercised = exercised.size();
  if (cov.total_apis == 0) return cov;

  double p = static_cast<double>(cov.covered_pairs) / static_cast<double>(cov.total_pairs);
  double a = static_cast<double>(cov.distinct_apis) / static_cast<double>(cov.total_apis);
  if (cov.relevant_rules == 0) {
    double total = weights.params + weights.apis;
    cov.score = total > 0 ? (weights.params * p + weights.apis * a) / total : 0.0;
  } else {
    double r = static_cast<double>(cov.rules_exercised) / static_cast<double>(cov.relevant_rules);
    double total = weights.params + weights.apis + weights.patterns;
    cov.score = total > 0 ? (weights.params * p + weights.apis * a + weights.patterns * r) / total : 0.0;
  }
  return cov;
}

// ---------------------------------------------------------------------------
// json

json violation_to_json(const Violation& v) {
  return json{{"test_id", v.test_id}, {"statement", v.statement_index}, {"api_id", v.api_id},
              {"param", v.param},     {"kind", to_string(v.kind)},        {"expected", v.expected},
              {"actual", v.actual}};
}

Violation violation_from_json(const json& j) {
  try {
    auto kind = parse_violation_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::parse, "unknown violation kind " + j.at("kind").dump());
    return Violation{j.at("test_id").get<std::string>(), j.at("statement").get<std::size_t>(),
                     j.at("api_id").get<std::string>(),  j.at("param").get<std::string>(),
                     *kind,                              j.value("expected", std::string()),
                     j.value("actual", std::string())};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed violation record: ") + e.what());
  }
}

} // namespace apiknow
