#pragma once

#include "apiknow/value.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace apiknow {

enum class ApiKind { class_constructor, free_function, method };

enum class Structure { array_like, list, tuple, set, dict, sparse_matrix, sequence, scalar };

enum class DataType { integer, floating, string, boolean };

/// Where a constraint field came from. Higher value wins in kb_merge.
enum class Provenance { propagated = 1, signature = 2, parametric_page = 3, example_code = 4 };

const char* to_string(ApiKind kind) noexcept;
const char* to_string(Structure structure) noexcept;
const char* to_string(DataType type) noexcept;
const char* to_string(Provenance provenance) noexcept;

std::optional<ApiKind> parse_api_kind(std::string_view text) noexcept;
std::optional<Structure> parse_structure(std::string_view text) noexcept;
std::optional<DataType> parse_data_type(std::string_view text) noexcept;
std::optional<Provenance> parse_provenance(std::string_view text) noexcept;

struct ParamSpec {
  std::string name;
  std::size_t position = 0;
  bool is_required = true;
  std::optional<Literal> declared_default;
  bool is_variadic = false; // *args / **kwargs pseudo-parameter

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct ApiSpec {
  std::string api_id;
  ApiKind kind = ApiKind::free_function;
  std::optional<std::string> owner;
  std::vector<ParamSpec> params;

  const ParamSpec* find_param(std::string_view name) const noexcept;

  friend bool operator==(const ApiSpec&, const ApiSpec&) = default;
};

/// One shape dimension: a symbolic name (n_samples) or a concrete length.
using Dim = std::variant<std::string, std::int64_t>;

struct ShapeSpec {
  std::vector<Dim> dims;

  std::string to_string() const;
  friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;
};

/// A constraint field is either undefined or a value with its provenance.
template <class T>
struct Field {
  std::optional<T> value;
  Provenance provenance = Provenance::signature;

  bool defined() const noexcept { return value.has_value(); }
  void set(T v, Provenance p) {
    value = std::move(v);
    provenance = p;
  }
  void clear() noexcept { value.reset(); }

  friend bool operator==(const Field& a, const Field& b) {
    if (a.value != b.value) return false;
    return !a.value || a.provenance == b.provenance;
  }
};

/// Mined constraint for one parameter. Alternatives are kept in order, the
/// first entry being the primary reading.
struct ParamConstraint {
  Field<std::vector<Structure>> structure;
  Field<std::vector<DataType>> data_type;
  Field<Literal> default_value;
  Field<std::vector<ShapeSpec>> shape;
  Field<std::int64_t> size;
  Field<std::int64_t> dimension;
  Field<std::vector<Literal>> allowed_values;
  Field<bool> optional;

  /// No field defined except possibly `optional` and `default_value`,
  /// i.e. nothing about the value itself is known.
  bool value_undefined() const noexcept;
  bool fully_undefined() const noexcept;
  bool has_provenance(Provenance p) const noexcept;

  friend bool operator==(const ParamConstraint&, const ParamConstraint&) = default;
};

using ConstraintMap = std::map<std::string, ParamConstraint>;

struct KbEntry {
  ApiSpec spec;
  ConstraintMap constraints;

  friend bool operator==(const KbEntry&, const KbEntry&) = default;
};

struct KnowledgeBase {
  std::string framework;
  std::string version;
  std::map<std::string, KbEntry> entries;
  /// page hash -> (api_id, param) pairs sharing that parametric page.
  std::map<std::string, std::vector<std::pair<std::string, std::string>>>
      parametric_page_fingerprints;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;
};

/// Throws Error(invariant) naming the first broken invariant.
void validate(const KnowledgeBase& kb);

nlohmann::ordered_json kb_to_json(const KnowledgeBase& kb);
KnowledgeBase kb_from_json(const nlohmann::ordered_json& json);
nlohmann::ordered_json constraint_to_json(const ParamConstraint& constraint);
ParamConstraint constraint_from_json(const nlohmann::ordered_json& json);

void kb_save(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase kb_load(const std::filesystem::path& path);

/// Field-wise union; on conflicts the higher provenance wins and ties keep
/// `primary`. Conflicting values are logged.
KnowledgeBase kb_merge(const KnowledgeBase& primary, const KnowledgeBase& secondary);

/// Merges two constraints for the same parameter with the same precedence rules.
ParamConstraint merge_constraint(const ParamConstraint& primary, const ParamConstraint& secondary,
                                 std::string_view context = {});

/// Exact, case-sensitive lookup.
const KbEntry* kb_lookup(const KnowledgeBase& kb, std::string_view api_id);

/// APIs belonging to a target (the id itself plus everything nested under it).
std::vector<const KbEntry*> target_entries(const KnowledgeBase& kb, std::string_view target);

/// Keeps ApiSpecs and signature-derived fields only; the knowledge-blind baseline.
KnowledgeBase strip_knowledge(const KnowledgeBase& kb);

} // namespace apiknow
