#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace apiknow {

struct NoneLiteral {
  friend bool operator==(const NoneLiteral&, const NoneLiteral&) = default;
};

/// A default that is not a plain scalar (e.g. `np.float64`, `(1, 1)`), kept
/// verbatim. Never rendered into generated tests.
struct ExprLiteral {
  std::string text;
  friend bool operator==(const ExprLiteral&, const ExprLiteral&) = default;
};

/// Tagged scalar used for defaults and allowed values.
using Literal = std::variant<NoneLiteral, bool, std::int64_t, double, std::string, ExprLiteral>;

enum class LiteralTag { none, boolean, integer, floating, string, expr };

LiteralTag tag_of(const Literal& literal) noexcept;

/// Parses Python-ish literal text: None, True/False, ints, floats, quoted
/// strings. Anything else becomes an ExprLiteral holding the trimmed text.
Literal parse_literal(std::string_view text);

/// Python-like rendering ('text', 1.5, None) for summaries and messages.
std::string describe(const Literal& literal);

enum class ValueKind { scalar, list, tuple, set, dict, array, object, opaque };

/// A concrete argument value: scalar, literal container, or a reference to
/// something only known by type (constructed object, opaque call result).
/// Dict items alternate key, value.
struct Value {
  ValueKind kind = ValueKind::scalar;
  Literal scalar;
  std::vector<Value> items;
  std::string type_name; // class api_id for objects

  static Value of(Literal literal);
  static Value container(ValueKind kind, std::vector<Value> items);
  static Value object(std::string class_id);
  static Value opaque();

  bool is_scalar() const noexcept { return kind == ValueKind::scalar; }
  bool is_sequence() const noexcept {
    return kind == ValueKind::list || kind == ValueKind::tuple || kind == ValueKind::array;
  }

  friend bool operator==(const Value&, const Value&) = default;
};

/// Dimensions of a rectangular nested sequence (list/tuple/array); nullopt
/// when ragged. Scalars have rank 0. Sets and dicts report their length only.
std::optional<std::vector<std::int64_t>> dims_of(const Value& value);

/// Nesting depth following the first element (ignores raggedness).
std::size_t depth_of(const Value& value);

/// Scalar leaves of a container (dict values only), in order.
void collect_leaves(const Value& value, std::vector<const Literal*>& out);

std::string describe(const Value& value);

nlohmann::ordered_json literal_to_json(const Literal& literal);
Literal literal_from_json(const nlohmann::ordered_json& json);
nlohmann::ordered_json value_to_json(const Value& value);
Value value_from_json(const nlohmann::ordered_json& json);

} // namespace apiknow
