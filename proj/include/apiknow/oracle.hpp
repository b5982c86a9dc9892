#pragma once

#include "apiknow/api_model.hpp"
#include "apiknow/test_model.hpp"
#include "apiknow/usage_miner.hpp"

#include <optional>
#include <string>
#include <vector>

namespace apiknow {

enum class ViolationKind { dtype, structure, shape, size, dimension, allowed_value, missing_required };

const char* to_string(ViolationKind kind) noexcept;
std::optional<ViolationKind> parse_violation_kind(std::string_view text) noexcept;

struct ValueCheck {
  ViolationKind kind;
  std::string expected;
  std::string actual;
};

/// Checks dtype, structure, dimension, shape, size and allowed values in
/// that order and reports the first failure. Undefined fields pass; a value
/// equal to the documented default always passes. Opaque values (results of
/// calls whose type is unknown) pass every check.
std::optional<ValueCheck> check_value(const Value& value, const ParamConstraint& constraint);

struct Violation {
  std::string test_id;
  std::size_t statement_index = 0;
  std::string api_id;
  std::string param;
  ViolationKind kind = ViolationKind::dtype;
  std::string expected;
  std::string actual;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct TestVerdict {
  bool valid = true;
  std::vector<Violation> violations;
  std::vector<std::string> warnings; // calls to APIs missing from the KB

  friend bool operator==(const TestVerdict&, const TestVerdict&) = default;
};

TestVerdict check_test(const TestCase& test, const KnowledgeBase& kb);

struct ProxyWeights {
  double params = 0.5;
  double apis = 0.3;
  double patterns = 0.2;
};

struct ModelCoverage {
  std::size_t covered_pairs = 0;
  std::size_t total_pairs = 0;
  std::size_t distinct_apis = 0;
  std::size_t total_apis = 0;
  std::size_t rules_exercised = 0;
  std::size_t relevant_rules = 0;
  double score = 0.0;
};

/// Execution-free coverage of the target's API model. Parameter pairs count
/// (api, param) combinations given a value that passes check_value (or left
/// to the default when optional); APIs without parameters contribute one
/// pair covered by any call. Rules are exercised when every antecedent API
/// is called before the consequent within one test.
ModelCoverage model_coverage(const TestSuite& suite, std::string_view target, const KnowledgeBase& kb,
                             const PatternIndex& patterns, const ProxyWeights& weights = {});

nlohmann::ordered_json violation_to_json(const Violation& violation);
Violation violation_from_json(const nlohmann::ordered_json& json);

} // namespace apiknow
