#pragma once

#include "apiknow/api_model.hpp"
#include "apiknow/code_scan.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace apiknow {

/// Normalized documentation for one API.
struct DocRecord {
  std::string api_id;
  std::string signature_text;
  std::map<std::string, std::string> param_docs;
  std::optional<std::string> example_code;
  std::optional<ApiKind> kind; // inferred from naming when absent

  /// Hash of the whitespace-normalized concatenated parameter sentences.
  std::string parametric_page_fingerprint() const;
};

/// Reads the doc corpus file (JSON array of records; see docs/formats.md).
std::vector<DocRecord> load_doc_corpus(const std::filesystem::path& path);
std::vector<DocRecord> doc_corpus_from_json(const nlohmann::ordered_json& json);

struct ParsedSignature {
  std::string name;
  std::vector<ParamSpec> params;
};

/// Throws Error(parse) on unbalanced parentheses or an empty name.
ParsedSignature parse_signature(std::string_view signature_text);

std::string normalize_sentence(std::string_view raw);

/// Constraint field kinds a rule can produce.
enum class FieldKind { structure, data_type, default_value, shape, size, dimension, allowed_values, optional };

const char* to_string(FieldKind kind) noexcept;

struct RuleMatch {
  int rule_id = 0;        // 1..18, 0 when nothing matched
  std::size_t length = 0; // matched characters
  ParamConstraint constraint;
};

struct LinguisticRuleInfo {
  int rule_id;
  std::string pattern;    // human-readable template
  std::vector<FieldKind> yields;
  std::string example;    // canonical example sentence
};

const std::vector<LinguisticRuleInfo>& linguistic_rules();

/// Applies the rules to one normalized sentence: every rule is tried, the
/// longest match wins, ties go to the lower rule id. Fields carry
/// provenance parametric-page. No match yields an undefined constraint.
RuleMatch apply_rules_detailed(std::string_view normalized);
ParamConstraint apply_rules(std::string_view normalized);

/// Mines a full parameter description: split into sentences and take the
/// constraint of the first sentence any rule matches.
ParamConstraint mine_param_doc(std::string_view raw);

struct ValueObservation {
  std::string api_id;
  std::string param;
  Structure structure = Structure::scalar;
  std::optional<DataType> data_type;
  std::vector<std::int64_t> dims; // empty for scalars
  Value value;
};

/// Concrete literal arguments bound to parameters of known APIs.
/// Unparseable fragments give an empty result and a warning.
std::vector<ValueObservation> mine_example(std::string_view example_code, const code::ApiCatalog& known,
                                           std::string_view context_class = {});

/// Observation -> constraint fields (structure, data_type, dimension).
ParamConstraint observation_constraint(const ValueObservation& observation);

/// Element type of a literal value (nullopt for mixed or empty).
std::optional<DataType> element_type(const Value& value);

KnowledgeBase propagate_shared(KnowledgeBase kb);

/// Full pipeline. Throws Error(duplicate_api) on repeated api ids.
KnowledgeBase build_kb(const std::vector<DocRecord>& corpus, std::string framework = "",
                       std::string version = "");

} // namespace apiknow
