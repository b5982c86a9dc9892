#include "apiknow/api_model.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <algorithm>
#include <set>

namespace apiknow {

using json = nlohmann::ordered_json;

namespace {

template <class E, std::size_t N>
std::optional<E> lookup_name(const std::pair<E, const char*> (&table)[N], std::string_view text) {
  for (const auto& [value, name] : table) {
    if (text == name) return value;
  }
  return std::nullopt;
}

template <class E, std::size_t N>
const char* name_of(const std::pair<E, const char*> (&table)[N], E value) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr std::pair<ApiKind, const char*> kApiKinds[] = {
    {ApiKind::class_constructor, "class-constructor"},
    {ApiKind::free_function, "free-function"},
    {ApiKind::method, "method"},
};

constexpr std::pair<Structure, const char*> kStructures[] = {
    {Structure::array_like, "array-like"}, {Structure::list, "list"},
    {Structure::tuple, "tuple"},           {Structure::set, "set"},
    {Structure::dict, "dict"},             {Structure::sparse_matrix, "sparse-matrix"},
    {Structure::sequence, "sequence"},     {Structure::scalar, "scalar"},
};

constexpr std::pair<DataType, const char*> kDataTypes[] = {
    {DataType::integer, "integer"},
    {DataType::floating, "float"},
    {DataType::string, "string"},
    {DataType::boolean, "boolean"},
};

constexpr std::pair<Provenance, const char*> kProvenances[] = {
    {Provenance::signature, "signature"},
    {Provenance::parametric_page, "parametric-page"},
    {Provenance::example_code, "example-code"},
    {Provenance::propagated, "propagated"},
};

} // namespace

const char* to_string(ApiKind kind) noexcept { return name_of(kApiKinds, kind); }
const char* to_string(Structure s) noexcept { return name_of(kStructures, s); }
const char* to_string(DataType t) noexcept { return name_of(kDataTypes, t); }
const char* to_string(Provenance p) noexcept { return name_of(kProvenances, p); }
std::optional<ApiKind> parse_api_kind(std::string_view t) noexcept { return lookup_name(kApiKinds, t); }
std::optional<Structure> parse_structure(std::string_view t) noexcept { return lookup_name(kStructures, t); }
std::optional<DataType> parse_data_type(std::string_view t) noexcept { return lookup_name(kDataTypes, t); }
std::optional<Provenance> parse_provenance(std::string_view t) noexcept { return lookup_name(kProvenances, t); }

const ParamSpec* ApiSpec::find_param(std::string_view name) const noexcept {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::string ShapeSpec::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) out += ", ";
    if (const auto* sym = std::get_if<std::string>(&dims[i])) {
      out += *sym;
    } else {
      out += std::to_string(std::get<std::int64_t>(dims[i]));
    }
  }
  if (dims.size() == 1) out += ",";
  return out + ")";
}

bool ParamConstraint::value_undefined() const noexcept {
  return !structure.defined() && !data_type.defined() && !shape.defined() && !size.defined() &&
         !dimension.defined() && !allowed_values.defined();
}

bool ParamConstraint::fully_undefined() const noexcept {
  return value_undefined() && !default_value.defined() && !optional.defined();
}

bool ParamConstraint::has_provenance(Provenance p) const noexcept {
  auto at = [p](const auto& f) { return f.defined() && f.provenance == p; };
  return at(structure) || at(data_type) || at(default_value) || at(shape) || at(size) ||
         at(dimension) || at(allowed_values) || at(optional);
}

// ---------------------------------------------------------------------------
// validation

namespace {

[[noreturn]] void invariant(const std::string& what) { throw Error(ErrorKind::invariant, what); }

void validate_spec(const ApiSpec& spec) {
  if (spec.api_id.empty()) invariant("empty api_id");
  if (spec.kind == ApiKind::method && !spec.owner) {
    invariant(spec.api_id + ": method without owner");
  }
  if (spec.kind == ApiKind::free_function && spec.owner) {
    invariant(spec.api_id + ": free function with owner");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < spec.params.size(); ++i) {
    const auto& p = spec.params[i];
    if (p.position != i) invariant(spec.api_id + ": parameter positions not contiguous at " + p.name);
    if (!names.insert(p.name).second) invariant(spec.api_id + ": duplicate parameter " + p.name);
    if (!p.is_variadic && p.is_required == p.declared_default.has_value()) {
      invariant(spec.api_id + ": parameter " + p.name +
                " is_required must be true exactly when no default is declared");
    }
  }
}

void validate_constraint(const std::string& where, const ParamConstraint& c) {
  if (c.allowed_values.defined() && c.allowed_values.value->empty()) {
    invariant(where + ": allowed_values empty");
  }
  if (c.dimension.defined() && *c.dimension.value < 1) {
    invariant(where + ": dimension must be >= 1");
  }
  if (c.size.defined() && *c.size.value < 0) invariant(where + ": negative size");
  if (c.structure.defined() && c.structure.value->empty()) invariant(where + ": empty structure list");
  if (c.data_type.defined() && c.data_type.value->empty()) invariant(where + ": empty data_type list");
  if (c.shape.defined()) {
    if (c.shape.value->empty()) invariant(where + ": empty shape list");
    for (const auto& shape : *c.shape.value) {
      if (shape.dims.empty()) invariant(where + ": empty shape");
      for (const auto& d : shape.dims) {
        if (const auto* n = std::get_if<std::int64_t>(&d); n && *n <= 0) {
          invariant(where + ": non-positive shape dimension");
        }
        if (const auto* s = std::get_if<std::string>(&d); s && s->empty()) {
          invariant(where + ": empty symbolic dimension");
        }
      }
    }
  }
}

} // namespace

void validate(const KnowledgeBase& kb) {
  for (const auto& [id, entry] : kb.entries) {
    if (id != entry.spec.api_id) invariant("entry key " + id + " differs from api_id " + entry.spec.api_id);
    validate_spec(entry.spec);
    for (const auto& [param, constraint] : entry.constraints) {
      if (!entry.spec.find_param(param)) {
        invariant(id + ": constraint names unknown parameter '" + param + "'");
      }
      validate_constraint(id + "." + param, constraint);
    }
  }
}

// ---------------------------------------------------------------------------
// json

namespace {

template <class T, class ToJson>
json field_to_json(const Field<T>& field, ToJson&& to_json) {
  if (!field.defined()) return "undefined";
  return json{{"value", to_json(*field.value)}, {"provenance", to_string(field.provenance)}};
}

template <class T, class FromJson>
Field<T> field_from_json(const json& j, const char* name, FromJson&& from_json) {
  Field<T> field;
  auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorKind::parse, std::string("missing constraint field ") + name);
  if (it->is_string() && it->get<std::string>() == "undefined") return field;
  if (!it->is_object() || !it->contains("value") || !it->contains("provenance")) {
    throw Error(ErrorKind::parse, std::string("malformed constraint field ") + name);
  }
  auto prov = parse_provenance(it->at("provenance").get<std::string>());
  if (!prov) throw Error(ErrorKind::parse, std::string("bad provenance in ") + name);
  field.set(from_json(it->at("value")), *prov);
  return field;
}

template <class E>
json enum_list_to_json(const std::vector<E>& list) {
  json out = json::array();
  for (auto e : list) out.push_back(to_string(e));
  return out;
}

template <class E, class Parse>
std::vector<E> enum_list_from_json(const json& j, Parse&& parse, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::parse, std::string("expected list of ") + what);
  std::vector<E> out;
  for (const auto& item : j) {
    auto parsed = parse(item.get<std::string>());
    if (!parsed) throw Error(ErrorKind::parse, std::string("unknown ") + what + " '" + item.get<std::string>() + "'");
    out.push_back(*parsed);
  }
  return out;
}

json shape_to_json(const ShapeSpec& shape) {
  json dims = json::array();
  for (const auto& d : shape.dims) {
    if (const auto* s = std::get_if<std::string>(&d)) {
      dims.push_back(*s);
    } else {
      dims.push_back(std::get<std::int64_t>(d));
    }
  }
  return dims;
}

ShapeSpec shape_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::parse, "shape must be a list");
  ShapeSpec shape;
  for (const auto& d : j) {
    if (d.is_string()) {
      shape.dims.emplace_back(d.get<std::string>());
    } else if (d.is_number_integer()) {
      shape.dims.emplace_back(d.get<std::int64_t>());
    } else {
      throw Error(ErrorKind::parse, "shape dims must be names or integers");
    }
  }
  return shape;
}

json spec_to_json(const ApiSpec& spec) {
  json params = json::array();
  for (const auto& p : spec.params) {
    json pj{{"name", p.name}, {"position", p.position}, {"is_required", p.is_required}};
    pj["declared_default"] = p.declared_default ? literal_to_json(*p.declared_default) : json(nullptr);
    if (p.is_variadic) pj["is_variadic"] = true;
    params.push_back(std::move(pj));
  }
  return json{{"api_id", spec.api_id},
              {"kind", to_string(spec.kind)},
              {"owner", spec.owner ? json(*spec.owner) : json(nullptr)},
              {"params", std::move(params)}};
}

ApiSpec spec_from_json(const json& j) {
  ApiSpec spec;
  spec.api_id = j.at("api_id").get<std::string>();
  auto kind = parse_api_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorKind::parse, spec.api_id + ": unknown kind");
  spec.kind = *kind;
  if (j.contains("owner") && !j.at("owner").is_null()) spec.owner = j.at("owner").get<std::string>();
  for (const auto& pj : j.at("params")) {
    ParamSpec p;
    p.name = pj.at("name").get<std::string>();
    p.position = pj.at("position").get<std::size_t>();
    p.is_required = pj.at("is_required").get<bool>();
    if (pj.contains("declared_default") && !pj.at("declared_default").is_null()) {
      p.declared_default = literal_from_json(pj.at("declared_default"));
    }
    p.is_variadic = pj.value("is_variadic", false);
    spec.params.push_back(std::move(p));
  }
  return spec;
}

} // namespace

json constraint_to_json(const ParamConstraint& c) {
  auto identity = [](const auto& v) { return json(v); };
  json out;
  out["structure"] = field_to_json(c.structure, [](const auto& v) { return enum_list_to_json(v); });
  out["data_type"] = field_to_json(c.data_type, [](const auto& v) { return enum_list_to_json(v); });
  out["default_value"] = field_to_json(c.default_value, literal_to_json);
  out["shape"] = field_to_json(c.shape, [](const std::vector<ShapeSpec>& shapes) {
    json arr = json::array();
    for (const auto& s : shapes) arr.push_back(shape_to_json(s));
    return arr;
  });
  out["size"] = field_to_json(c.size, identity);
  out["dimension"] = field_to_json(c.dimension, identity);
  out["allowed_values"] = field_to_json(c.allowed_values, [](const std::vector<Literal>& values) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back(literal_to_json(v));
    return arr;
  });
  out["optional"] = field_to_json(c.optional, identity);
  return out;
}

ParamConstraint constraint_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "constraint must be an object");
  ParamConstraint c;
  c.structure = field_from_json<std::vector<Structure>>(j, "structure", [](const json& v) {
    return enum_list_from_json<Structure>(v, parse_structure, "structure");
  });
  c.data_type = field_from_json<std::vector<DataType>>(j, "data_type", [](const json& v) {
    return enum_list_from_json<DataType>(v, parse_data_type, "data_type");
  });
  c.default_value = field_from_json<Literal>(j, "default_value", literal_from_json);
  c.shape = field_from_json<std::vector<ShapeSpec>>(j, "shape", [](const json& v) {
    if (!v.is_array()) throw Error(ErrorKind::parse, "shape alternatives must be a list");
    std::vector<ShapeSpec> shapes;
    for (const auto& s : v) shapes.push_back(shape_from_json(s));
    return shapes;
  });
  c.size = field_from_json<std::int64_t>(j, "size", [](const json& v) { return v.get<std::int64_t>(); });
  c.dimension = field_from_json<std::int64_t>(j, "dimension", [](const json& v) { return v.get<std::int64_t>(); });
  c.allowed_values = field_from_json<std::vector<Literal>>(j, "allowed_values", [](const json& v) {
    if (!v.is_array()) throw Error(ErrorKind::parse, "allowed_values must be a list");
    std::vector<Literal> values;
    for (const auto& item : v) values.push_back(literal_from_json(item));
    return values;
  });
  c.optional = field_from_json<bool>(j, "optional", [](const json& v) { return v.get<bool>(); });
  return c;
}

json kb_to_json(const KnowledgeBase& kb) {
  json entries = json::array();
  for (const auto& [id, entry] : kb.entries) {
    json constraints = json::object();
    for (const auto& [param, c] : entry.constraints) constraints[param] = constraint_to_json(c);
    entries.push_back(json{{"spec", spec_to_json(entry.spec)}, {"constraints", std::move(constraints)}});
  }
  json prints = json::object();
  for (const auto& [hash, members] : kb.parametric_page_fingerprints) {
    json list = json::array();
    for (const auto& [api, param] : members) list.push_back(json::array({api, param}));
    prints[hash] = std::move(list);
  }
  return json{{"format", "apiknow-kb/1"},
              {"framework", kb.framework},
              {"version", kb.version},
              {"entries", std::move(entries)},
              {"parametric_page_fingerprints", std::move(prints)}};
}

KnowledgeBase kb_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse, "knowledge base must be a JSON object");
  for (const char* key : {"framework", "version", "entries"}) {
    if (!j.contains(key)) throw Error(ErrorKind::parse, std::string("missing top-level key ") + key);
  }
  KnowledgeBase kb;
  try {
    kb.framework = j.at("framework").get<std::string>();
    kb.version = j.at("version").get<std::string>();
    for (const auto& ej : j.at("entries")) {
      KbEntry entry;
      entry.spec = spec_from_json(ej.at("spec"));
      for (const auto& [param, cj] : ej.at("constraints").items()) {
        entry.constraints[param] = constraint_from_json(cj);
      }
      auto id = entry.spec.api_id;
      if (!kb.entries.emplace(id, std::move(entry)).second) {
        throw Error(ErrorKind::invariant, "duplicate api_id " + id);
      }
    }
    if (j.contains("parametric_page_fingerprints")) {
      for (const auto& [hash, members] : j.at("parametric_page_fingerprints").items()) {
        auto& list = kb.parametric_page_fingerprints[hash];
        for (const auto& pair : members) {
          list.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, std::string("malformed record: ") + e.what());
  }
  validate(kb);
  return kb;
}

void kb_save(const KnowledgeBase& kb, const std::filesystem::path& path) {
  // No trailing newline: the closing brace is the last byte, so any
  // truncation is detectable on load.
  try {
    write_file(path, kb_to_json(kb).dump(2));
  } catch (const Error& e) {
    throw Error(ErrorKind::persistence, e.what());
  }
}

KnowledgeBase kb_load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::persistence, "missing knowledge base file " + path.string());
  }
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return kb_from_json(j);
}

// ---------------------------------------------------------------------------
// merge / lookup

namespace {

template <class T>
void merge_field(Field<T>& out, const Field<T>& other, std::string_view context, const char* name) {
  if (!other.defined()) return;
  if (!out.defined()) {
    out = other;
    return;
  }
  if (*out.value != *other.value) {
    log().info("constraint conflict at {}.{}: {} ({}) vs {} ({})", context, name, "primary",
               to_string(out.provenance), "secondary", to_string(other.provenance));
  }
  if (static_cast<int>(other.provenance) > static_cast<int>(out.provenance)) out = other;
}

} // namespace

ParamConstraint merge_constraint(const ParamConstraint& primary, const ParamConstraint& secondary,
                                 std::string_view context) {
  ParamConstraint out = primary;
  merge_field(out.structure, secondary.structure, context, "structure");
  merge_field(out.data_type, secondary.data_type, context, "data_type");
  merge_field(out.default_value, secondary.default_value, context, "default_value");
  merge_field(out.shape, secondary.shape, context, "shape");
  merge_field(out.size, secondary.size, context, "size");
  merge_field(out.dimension, secondary.dimension, context, "dimension");
  merge_field(out.allowed_values, secondary.allowed_values, context, "allowed_values");
  merge_field(out.optional, secondary.optional, context, "optional");
  return out;
}

KnowledgeBase kb_merge(const KnowledgeBase& primary, const KnowledgeBase& secondary) {
  if (primary.framework != secondary.framework) {
    throw Error(ErrorKind::framework_mismatch,
                "cannot merge '" + primary.framework + "' with '" + secondary.framework + "'");
  }
  KnowledgeBase out = primary;
  if (out.version.empty()) out.version = secondary.version;
  for (const auto& [id, entry] : secondary.entries) {
    auto it = out.entries.find(id);
    if (it == out.entries.end()) {
      out.entries.emplace(id, entry);
      continue;
    }
    if (it->second.spec != entry.spec) {
      log().info("signature conflict for {}: keeping primary", id);
    }
    for (const auto& [param, c] : entry.constraints) {
      if (!it->second.spec.find_param(param)) continue;
      auto& slot = it->second.constraints[param];
      slot = merge_constraint(slot, c, id + "." + param);
    }
  }
  for (const auto& [hash, members] : secondary.parametric_page_fingerprints) {
    auto& list = out.parametric_page_fingerprints[hash];
    list.insert(list.end(), members.begin(), members.end());
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return out;
}

const KbEntry* kb_lookup(const KnowledgeBase& kb, std::string_view api_id) {
  auto it = kb.entries.find(std::string(api_id));
  return it == kb.entries.end() ? nullptr : &it->second;
}

std::vector<const KbEntry*> target_entries(const KnowledgeBase& kb, std::string_view target) {
  std::vector<const KbEntry*> out;
  std::string prefix = std::string(target) + ".";
  for (const auto& [id, entry] : kb.entries) {
    if (id == target || id.starts_with(prefix)) out.push_back(&entry);
  }
  return out;
}

KnowledgeBase strip_knowledge(const KnowledgeBase& kb) {
  KnowledgeBase out;
  out.framework = kb.framework;
  out.version = kb.version;
  for (const auto& [id, entry] : kb.entries) {
    KbEntry stripped;
    stripped.spec = entry.spec;
    for (const auto& p : entry.spec.params) {
      if (p.is_variadic) continue;
      ParamConstraint c;
      if (p.declared_default) c.default_value.set(*p.declared_default, Provenance::signature);
      c.optional.set(!p.is_required, Provenance::signature);
      stripped.constraints[p.name] = std::move(c);
    }
    out.entries.emplace(id, std::move(stripped));
  }
  return out;
}

} // namespace apiknow
