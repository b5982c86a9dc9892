#include "apiknow/test_model.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <cmath>
#include <map>
#include <set>

namespace apiknow {

using json = nlohmann::ordered_json;

const char* to_string(StatementKind kind) noexcept {
  switch (kind) {
    case StatementKind::construct: return "construct";
    case StatementKind::call: return "call";
    case StatementKind::assign_literal: return "assign-literal";
    case StatementKind::assert_not_none: return "assert-not-none";
  }
  return "?";
}

static std::optional<StatementKind> parse_statement_kind(std::string_view text) {
  for (auto kind : {StatementKind::construct, StatementKind::call, StatementKind::assign_literal,
                    StatementKind::assert_not_none}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

const char* to_string(Backend backend) noexcept { return backend == Backend::random ? "random" : "search"; }

std::optional<Backend> parse_backend(std::string_view text) noexcept {
  if (text == "random") return Backend::random;
  if (text == "search") return Backend::search;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// structure

void validate_structure(const TestCase& test) {
  std::set<int> defined;
  auto fail = [&](std::size_t index, const std::string& what) {
    throw Error(ErrorKind::invariant, "test " + test.id + " statement " + std::to_string(index) + ": " + what);
  };
  for (std::size_t i = 0; i < test.statements.size(); ++i) {
    const auto& st = test.statements[i];
    for (const auto& arg : st.args) {
      if (const auto* ref = std::get_if<VarRef>(&arg.value); ref && !defined.count(ref->id)) {
        fail(i, "variable " + std::to_string(ref->id) + " used before definition");
      }
    }
    if (st.receiver_var && !defined.count(*st.receiver_var)) {
      fail(i, "variable " + std::to_string(*st.receiver_var) + " used before definition");
    }
    if (st.kind == StatementKind::assert_not_none && !st.receiver_var) fail(i, "assertion without a variable");
    if ((st.kind == StatementKind::construct || st.kind == StatementKind::call) && st.callee.empty()) {
      fail(i, "call without callee");
    }
    if (st.target_var && !defined.insert(*st.target_var).second) {
      fail(i, "variable " + std::to_string(*st.target_var) + " defined twice");
    }
  }
}

TestCase canonicalize(TestCase test) {
  std::map<int, int> renumber;
  for (const auto& st : test.statements) {
    if (st.target_var && !renumber.count(*st.target_var)) {
      int next = static_cast<int>(renumber.size());
      renumber[*st.target_var] = next;
    }
  }
  auto map_id = [&](int id) {
    auto it = renumber.find(id);
    return it == renumber.end() ? id : it->second;
  };
  for (auto& st : test.statements) {
    if (st.target_var) st.target_var = map_id(*st.target_var);
    if (st.receiver_var) st.receiver_var = map_id(*st.receiver_var);
    for (auto& arg : st.args) {
      if (auto* ref = std::get_if<VarRef>(&arg.value)) ref->id = map_id(ref->id);
    }
  }
  return test;
}

std::string compute_test_id(const TestCase& test) {
  auto canonical = canonicalize(test);
  json statements = json::array();
  for (const auto& st : canonical.statements) statements.push_back(statement_to_json(st));
  return to_hex(fnv1a64(statements.dump()));
}

// ---------------------------------------------------------------------------
// json

static json arg_to_json(const Arg& arg) {
  json j = json::object();
  if (const auto* pos = std::get_if<std::size_t>(&arg.binding)) {
    j["pos"] = *pos;
  } else {
    j["kw"] = std::get<std::string>(arg.binding);
  }
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          j["var"] = v.id;
        } else if constexpr (std::is_same_v<T, Value>) {
          j["value"] = value_to_json(v);
        } else {
          j["default"] = true;
        }
      },
      arg.value);
  return j;
}

static Arg arg_from_json(const json& j) {
  Arg arg;
  if (j.contains("pos")) {
    arg.binding = j.at("pos").get<std::size_t>();
  } else {
    arg.binding = j.at("kw").get<std::string>();
  }
  if (j.contains("var")) {
    arg.value = VarRef{j.at("var").get<int>()};
  } else if (j.contains("value")) {
    arg.value = value_from_json(j.at("value"));
  } else if (j.value("default", false)) {
    arg.value = UseDefault{};
  } else {
    throw Error(ErrorKind::parse, "argument without var, value or default");
  }
  return arg;
}

json statement_to_json(const Statement& st) {
  json j{{"kind", to_string(st.kind)}};
  if (st.target_var) j["target"] = *st.target_var;
  if (!st.callee.empty()) j["callee"] = st.callee;
  if (st.receiver_var) j["receiver"] = *st.receiver_var;
  if (st.kind == StatementKind::assign_literal) j["literal"] = value_to_json(st.literal);
  if (!st.args.empty()) {
    json args = json::array();
    for (const auto& a : st.args) args.push_back(arg_to_json(a));
    j["args"] = std::move(args);
  }
  return j;
}

Statement statement_from_json(const json& j) {
  Statement st;
  auto kind = parse_statement_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorKind::parse, "unknown statement kind " + j.at("kind").dump());
  st.kind = *kind;
  if (j.contains("target")) st.target_var = j.at("target").get<int>();
  if (j.contains("callee")) st.callee = j.at("callee").get<std::string>();
  if (j.contains("receiver")) st.receiver_var = j.at("receiver").get<int>();
  if (j.contains("literal")) st.literal = value_from_json(j.at("literal"));
  if (j.contains("args")) {
    for (const auto& a : j.at("args")) st.args.push_back(arg_from_json(a));
  }
  return st;
}

json test_to_json(const TestCase& test) {
  json statements = json::array();
  for (const auto& st : test.statements) statements.push_back(statement_to_json(st));
  return json{{"id", test.id},
              {"seed", test.seed},
              {"backend", to_string(test.backend)},
              {"statements", std::move(statements)}};
}

TestCase test_from_json(const json& j) {
  TestCase test;
  try {
    test.id = j.at("id").get<std::string>();
    test.seed = j.value("seed", std::uint64_t{0});
    auto backend = parse_backend(j.value("backend", std::string("random")));
    if (!backend) throw Error(ErrorKind::parse, "unknown backend in test " + test.id);
    test.backend = *backend;
    for (const auto& st : j.at("statements")) test.statements.push_back(statement_from_json(st));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed test case: ") + e.what());
  }
  validate_structure(test);
  return test;
}

json suite_to_json(const TestSuite& suite) {
  json tests = json::array();
  for (const auto& t : suite.tests) tests.push_back(test_to_json(t));
  return json{{"target", suite.target},
              {"backend", to_string(suite.backend)},
              {"seed", suite.seed},
              {"label", suite.label},
              {"tests", std::move(tests)}};
}

TestSuite suite_from_json(const json& j) {
  TestSuite suite;
  try {
    suite.target = j.at("target").get<std::string>();
    auto backend = parse_backend(j.value("backend", std::string("random")));
    if (!backend) throw Error(ErrorKind::parse, "unknown suite backend");
    suite.backend = *backend;
    suite.seed = j.value("seed", std::uint64_t{0});
    suite.label = j.value("label", std::string());
    for (const auto& t : j.at("tests")) suite.tests.push_back(test_from_json(t));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed suite: ") + e.what());
  }
  return suite;
}

// ---------------------------------------------------------------------------
// config

std::int64_t GenConfig::work_units() const {
  return static_cast<std::int64_t>(std::floor(budget_seconds * units_per_second));
}

void validate(const GenConfig& c) {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::usage, "invalid generation config: " + what); };
  auto probability = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must be in [0, 1]");
  };
  probability(c.mutation_rate, "mutation_rate");
  probability(c.crossover_rate, "crossover_rate");
  probability(c.p_use_default, "p_use_default");
  probability(c.p_include_optional, "p_include_optional");
  probability(c.p_reuse_archive, "p_reuse_archive");
  if (!(c.budget_seconds >= 0)) fail("budget_seconds must be >= 0");
  if (!(c.units_per_second > 0)) fail("units_per_second must be > 0");
  if (c.max_sequence_length < 1) fail("max_sequence_length must be >= 1");
  if (c.population_size < 2) fail("population_size must be >= 2");
  if (c.int_min > c.int_max) fail("int range is empty");
  if (!(c.float_min <= c.float_max)) fail("float range is empty");
  if (c.dim_min < 1 || c.dim_min > c.dim_max) fail("dimension range is empty");
  if (c.string_alphabet.empty()) fail("string alphabet is empty");
  if (c.max_tests_per_suite < 1) fail("max_tests_per_suite must be >= 1");
}

// ---------------------------------------------------------------------------
// rng

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

std::uint64_t Rng::next() { return engine_(); }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorKind::invariant, "Rng::below called with 0");
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

std::int64_t Rng::range(std::int64_t lo, std::int64_t hi) {
  auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
  if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(next());
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::real(double lo, double hi) { return lo + (hi - lo) * unit(); }

bool Rng::chance(double p) { return unit() < p; }

Rng Rng::split(std::string_view label) const { return Rng(splitmix64(seed_ ^ fnv1a64(label))); }

} // namespace apiknow
