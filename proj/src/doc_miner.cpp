#include "apiknow/doc_miner.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <algorithm>
#include <set>

namespace apiknow {

using json = nlohmann::ordered_json;

std::string DocRecord::parametric_page_fingerprint() const {
  std::string page;
  for (const auto& [name, sentence] : param_docs) {
    page += name;
    page += ": ";
    page += normalize_sentence(sentence);
    page += '\n';
  }
  return to_hex(fnv1a64(page));
}

std::vector<DocRecord> doc_corpus_from_json(const json& j) {
  const json* records = &j;
  if (j.is_object()) {
    if (!j.contains("records")) throw Error(ErrorKind::parse, "doc corpus object lacks 'records'");
    records = &j.at("records");
  }
  if (!records->is_array()) throw Error(ErrorKind::parse, "doc corpus must be a list of records");
  std::vector<DocRecord> out;
  std::size_t index = 0;
  for (const auto& r : *records) {
    try {
      DocRecord record;
      record.api_id = r.at("api_id").get<std::string>();
      record.signature_text = r.at("signature").get<std::string>();
      if (record.signature_text.empty()) {
        throw Error(ErrorKind::parse, "record " + record.api_id + ": empty signature");
      }
      if (r.contains("params")) {
        for (const auto& [name, sentence] : r.at("params").items()) {
          record.param_docs[name] = sentence.get<std::string>();
        }
      }
      if (r.contains("example") && !r.at("example").is_null()) {
        record.example_code = r.at("example").get<std::string>();
      }
      if (r.contains("kind")) {
        record.kind = parse_api_kind(r.at("kind").get<std::string>());
        if (!record.kind) throw Error(ErrorKind::parse, "record " + record.api_id + ": unknown kind");
      }
      out.push_back(std::move(record));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, "doc record #" + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  return out;
}

std::vector<DocRecord> load_doc_corpus(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing doc corpus " + path.string());
  try {
    return doc_corpus_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// signatures

namespace {

// Splits at top-level commas, respecting brackets and quotes.
std::vector<std::string> split_top_level(std::string_view text) {
  std::vector<std::string> parts;
  std::string current;
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      current += c;
      if (c == '\\' && i + 1 < text.size()) {
        current += text[++i];
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '\'' || c == '"') quote = c;
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(current);
      current.clear();
      continue;
    }
    current += c;
  }
  parts.push_back(current);
  return parts;
}

std::size_t top_level_equals(std::string_view text) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') quote = c;
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == '=' && depth == 0) {
      bool comparison = (i + 1 < text.size() && text[i + 1] == '=') ||
                        (i > 0 && std::string_view("=!<>").find(text[i - 1]) != std::string_view::npos);
      if (!comparison) return i;
    }
  }
  return std::string_view::npos;
}

} // namespace

ParsedSignature parse_signature(std::string_view signature_text) {
  std::string text = trim(signature_text);
  for (std::string_view lead : {"async def ", "def ", "class "}) {
    if (text.starts_with(lead)) text = trim(text.substr(lead.size()));
  }
  auto open = text.find('(');
  if (open == std::string::npos) throw Error(ErrorKind::parse, "signature lacks a parameter list: " + text);
  ParsedSignature sig;
  sig.name = simple_name(trim(text.substr(0, open)));
  if (sig.name.empty()) throw Error(ErrorKind::parse, "signature has an empty name: " + text);

  int depth = 0;
  char quote = 0;
  std::size_t close = std::string::npos;
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') quote = c;
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') {
      if (--depth == 0) {
        close = i;
        break;
      }
    }
  }
  if (close == std::string::npos || quote) {
    throw Error(ErrorKind::parse, "unbalanced parentheses in signature: " + text);
  }
  for (std::size_t i = close + 1; i < text.size(); ++i) {
    if (text[i] == '(' || text[i] == ')') {
      throw Error(ErrorKind::parse, "unbalanced parentheses in signature: " + text);
    }
  }

  auto parts = split_top_level(std::string_view(text).substr(open + 1, close - open - 1));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::string part = trim(parts[i]);
    if (part.empty() || part == "*" || part == "/") continue;
    ParamSpec p;
    auto eq = top_level_equals(part);
    std::string name_part = trim(part.substr(0, eq));
    if (auto colon = name_part.find(':'); colon != std::string::npos) name_part = trim(name_part.substr(0, colon));
    if (name_part.starts_with("*")) {
      p.name = name_part;
      p.is_variadic = true;
      p.is_required = false;
    } else {
      p.name = name_part;
      if (eq != std::string::npos) {
        p.declared_default = parse_literal(part.substr(eq + 1));
        p.is_required = false;
      }
    }
    if (p.name.empty()) throw Error(ErrorKind::parse, "empty parameter name in signature: " + text);
    if (sig.params.empty() && (p.name == "self" || p.name == "cls")) continue;
    p.position = sig.params.size();
    sig.params.push_back(std::move(p));
  }
  return sig;
}

// ---------------------------------------------------------------------------
// example code

std::optional<DataType> element_type(const Value& value) {
  std::vector<const Literal*> leaves;
  collect_leaves(value, leaves);
  bool any_int = false, any_float = false, any_bool = false, any_str = false, any_other = false;
  for (const Literal* leaf : leaves) {
    switch (tag_of(*leaf)) {
    case LiteralTag::integer: any_int = true; break;
    case LiteralTag::floating: any_float = true; break;
    case LiteralTag::boolean: any_bool = true; break;
    case LiteralTag::string: any_str = true; break;
    case LiteralTag::none: break;
    case LiteralTag::expr: any_other = true; break;
    }
  }
  if (any_other) return std::nullopt;
  int kinds = (any_int || any_float) + any_bool + any_str;
  if (kinds != 1) return std::nullopt;
  if (any_str) return DataType::string;
  if (any_bool) return DataType::boolean;
  return any_float ? DataType::floating : DataType::integer;
}

namespace {

bool numeric_leaves(const Value& value) {
  std::vector<const Literal*> leaves;
  collect_leaves(value, leaves);
  if (leaves.empty()) return false;
  return std::all_of(leaves.begin(), leaves.end(), [](const Literal* l) {
    auto t = tag_of(*l);
    return t == LiteralTag::integer || t == LiteralTag::floating || t == LiteralTag::boolean;
  });
}

std::optional<ValueObservation> observe(const std::string& api, const std::string& param, const Value& value) {
  ValueObservation obs;
  obs.api_id = api;
  obs.param = param;
  obs.value = value;
  switch (value.kind) {
  case ValueKind::scalar:
    if (tag_of(value.scalar) == LiteralTag::none || tag_of(value.scalar) == LiteralTag::expr) return std::nullopt;
    obs.structure = Structure::scalar;
    break;
  case ValueKind::array:
    obs.structure = Structure::array_like;
    break;
  case ValueKind::list:
    obs.structure = dims_of(value) && numeric_leaves(value) ? Structure::array_like : Structure::list;
    break;
  case ValueKind::tuple: obs.structure = Structure::tuple; break;
  case ValueKind::set: obs.structure = Structure::set; break;
  case ValueKind::dict: obs.structure = Structure::dict; break;
  case ValueKind::object:
  case ValueKind::opaque:
    return std::nullopt;
  }
  obs.data_type = element_type(value);
  if (value.is_sequence()) {
    auto dims = dims_of(value);
    if (dims) {
      if (std::any_of(dims->begin(), dims->end(), [](std::int64_t d) { return d <= 0; })) return std::nullopt;
      obs.dims = *dims;
    } else {
      obs.dims = {static_cast<std::int64_t>(value.items.size())};
    }
  } else if (value.kind == ValueKind::set || value.kind == ValueKind::dict) {
    if (value.items.empty()) return std::nullopt;
  }
  return obs;
}

} // namespace

std::vector<ValueObservation> mine_example(std::string_view example_code, const code::ApiCatalog& known,
                                           std::string_view context_class) {
  std::vector<ValueObservation> out;
  code::ScanResult scanned;
  try {
    scanned = code::scan(example_code, known, context_class);
  } catch (const Error& e) {
    log().warn("example code skipped: {}", e.what());
    return out;
  }
  for (const auto& call : scanned.calls) {
    const ApiSpec* spec = known.find(call.api_id);
    if (!spec) continue;
    std::size_t positional = 0;
    for (std::size_t i = 0; i < call.literal_args.size(); ++i) {
      const auto& keyword = call.call->keywords[i];
      const ParamSpec* param = nullptr;
      if (!keyword) {
        std::size_t index = positional++;
        if (index < spec->params.size() && !spec->params[index].is_variadic) param = &spec->params[index];
      } else if (*keyword != "*" && *keyword != "**") {
        param = spec->find_param(*keyword);
      }
      if (!param || !call.literal_args[i]) continue;
      if (auto obs = observe(spec->api_id, param->name, *call.literal_args[i])) out.push_back(std::move(*obs));
    }
  }
  return out;
}

ParamConstraint observation_constraint(const ValueObservation& obs) {
  constexpr auto source = Provenance::example_code;
  ParamConstraint c;
  c.structure.set({obs.structure}, source);
  if (obs.data_type) c.data_type.set({*obs.data_type}, source);
  if (obs.value.is_sequence() && !obs.dims.empty()) {
    c.dimension.set(static_cast<std::int64_t>(obs.dims.size()), source);
  }
  return c;
}

// ---------------------------------------------------------------------------
// propagation and pipeline

KnowledgeBase propagate_shared(KnowledgeBase kb) {
  constexpr auto example = Provenance::example_code;
  for (const auto& [hash, members] : kb.parametric_page_fingerprints) {
    std::map<std::string, std::vector<std::string>> apis_by_param;
    for (const auto& [api, param] : members) apis_by_param[param].push_back(api);
    for (auto& [param, apis] : apis_by_param) {
      std::sort(apis.begin(), apis.end());
      const ParamConstraint* source = nullptr;
      std::string source_api;
      for (const auto& api : apis) {
        auto entry = kb.entries.find(api);
        if (entry == kb.entries.end()) continue;
        auto c = entry->second.constraints.find(param);
        if (c != entry->second.constraints.end() && c->second.has_provenance(example)) {
          source = &c->second;
          source_api = api;
          break;
        }
      }
      if (!source) continue;
      const ParamConstraint from = *source;
      for (const auto& api : apis) {
        auto entry = kb.entries.find(api);
        if (entry == kb.entries.end() || !entry->second.spec.find_param(param)) continue;
        auto& target = entry->second.constraints[param];
        if (target.has_provenance(example)) continue;
        if (!target.data_type.defined() && from.data_type.defined() && from.data_type.provenance == example) {
          target.data_type.set(*from.data_type.value, Provenance::propagated);
          log().debug("propagated {}.{} data_type from {}", api, param, source_api);
        }
        if (!target.structure.defined() && from.structure.defined() && from.structure.provenance == example) {
          target.structure.set(*from.structure.value, Provenance::propagated);
        }
      }
    }
  }
  return kb;
}

namespace {

ApiKind infer_kind(const std::string& id, const std::set<std::string>& ids,
                   const std::map<std::string, ApiKind>& declared) {
  if (auto it = declared.find(id); it != declared.end()) return it->second;
  std::string prefix = id + ".";
  for (const auto& other : ids) {
    if (other.starts_with(prefix)) return ApiKind::class_constructor;
  }
  auto name = simple_name(id);
  if (!name.empty() && std::isupper(static_cast<unsigned char>(name.front()))) return ApiKind::class_constructor;
  auto parent = parent_name(id);
  if (!parent.empty()) {
    if (auto it = declared.find(parent); it != declared.end() && it->second == ApiKind::class_constructor) {
      return ApiKind::method;
    }
    auto parent_simple = simple_name(parent);
    if (!parent_simple.empty() && std::isupper(static_cast<unsigned char>(parent_simple.front()))) {
      return ApiKind::method;
    }
  }
  return ApiKind::free_function;
}

} // namespace

KnowledgeBase build_kb(const std::vector<DocRecord>& input, std::string framework, std::string version) {
  std::vector<const DocRecord*> records;
  std::set<std::string> ids;
  std::map<std::string, ApiKind> declared;
  for (const auto& r : input) {
    if (!ids.insert(r.api_id).second) throw Error(ErrorKind::duplicate_api, "duplicate api_id " + r.api_id);
    if (r.kind) declared[r.api_id] = *r.kind;
    records.push_back(&r);
  }
  std::sort(records.begin(), records.end(),
            [](const DocRecord* a, const DocRecord* b) { return a->api_id < b->api_id; });
  if (framework.empty() && !records.empty()) {
    framework = records.front()->api_id.substr(0, records.front()->api_id.find('.'));
  }

  KnowledgeBase signatures{framework, version, {}, {}};
  KnowledgeBase pages{framework, version, {}, {}};
  KnowledgeBase examples{framework, version, {}, {}};

  std::vector<ApiSpec> specs;
  for (const DocRecord* r : records) {
    auto parsed = parse_signature(r->signature_text);
    ApiSpec spec;
    spec.api_id = r->api_id;
    spec.kind = infer_kind(r->api_id, ids, declared);
    if (spec.kind == ApiKind::method) spec.owner = parent_name(r->api_id);
    spec.params = std::move(parsed.params);
    if (parsed.name != simple_name(r->api_id) && spec.kind != ApiKind::class_constructor) {
      log().info("{}: signature names '{}'", r->api_id, parsed.name);
    }

    KbEntry sig_entry{spec, {}};
    for (const auto& p : spec.params) {
      ParamConstraint c;
      if (!p.is_variadic) {
        if (p.declared_default) c.default_value.set(*p.declared_default, Provenance::signature);
        c.optional.set(!p.is_required, Provenance::signature);
      }
      sig_entry.constraints[p.name] = std::move(c);
    }
    signatures.entries.emplace(r->api_id, std::move(sig_entry));

    KbEntry page_entry{spec, {}};
    for (const auto& [name, sentence] : r->param_docs) {
      const ParamSpec* p = spec.find_param(name);
      if (!p) {
        log().info("{}: documented parameter '{}' is not in the signature", r->api_id, name);
        continue;
      }
      if (p->is_variadic) continue;
      page_entry.constraints[name] = mine_param_doc(sentence);
    }
    pages.entries.emplace(r->api_id, std::move(page_entry));
    examples.entries.emplace(r->api_id, KbEntry{spec, {}});

    if (!r->param_docs.empty()) {
      auto& members = pages.parametric_page_fingerprints[r->parametric_page_fingerprint()];
      for (const auto& [name, sentence] : r->param_docs) {
        if (spec.find_param(name)) members.emplace_back(r->api_id, name);
      }
      std::sort(members.begin(), members.end());
    }
    specs.push_back(std::move(spec));
  }

  auto catalog = code::ApiCatalog::from_specs(specs);
  for (const DocRecord* r : records) {
    if (!r->example_code) continue;
    const ApiSpec* own = catalog.find(r->api_id);
    std::string context = own && own->kind == ApiKind::method && own->owner ? *own->owner : r->api_id;
    for (const auto& obs : mine_example(*r->example_code, catalog, context)) {
      auto& entry = examples.entries.at(obs.api_id);
      auto c = observation_constraint(obs);
      auto [it, inserted] = entry.constraints.emplace(obs.param, c);
      if (!inserted && it->second != c) {
        log().info("example conflict for {}.{}: keeping the first observation", obs.api_id, obs.param);
      }
    }
  }

  KnowledgeBase kb = kb_merge(kb_merge(examples, pages), signatures);
  // optionality comes from the signature alone
  for (auto& [id, entry] : kb.entries) {
    for (const auto& p : entry.spec.params) {
      auto& c = entry.constraints[p.name];
      if (p.is_variadic) {
        c = ParamConstraint{};
      } else {
        c.optional.set(!p.is_required, Provenance::signature);
      }
    }
  }
  kb = propagate_shared(std::move(kb));
  validate(kb);
  return kb;
}

} // namespace apiknow
