#include "apiknow/value.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <charconv>
#include <cmath>

namespace apiknow {

LiteralTag tag_of(const Literal& literal) noexcept {
  return static_cast<LiteralTag>(literal.index());
}

namespace {

std::optional<std::string> unquote(std::string_view text) {
  if (text.size() < 2) return std::nullopt;
  char q = text.front();
  if ((q != '\'' && q != '"') || text.back() != q) return std::nullopt;
  std::string out;
  for (std::size_t i = 1; i + 1 < text.size(); ++i) {
    char c = text[i];
    if (c == q) return std::nullopt; // embedded unescaped quote: not a single literal
    if (c == '\\' && i + 2 < text.size()) {
      char n = text[++i];
      switch (n) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      default: out += n; break;
      }
      continue;
    }
    out += c;
  }
  return out;
}

} // namespace

Literal parse_literal(std::string_view raw) {
  std::string text = trim(raw);
  if (text == "None") return NoneLiteral{};
  if (text == "True") return true;
  if (text == "False") return false;
  if (auto s = unquote(text)) return *s;
  if (!text.empty()) {
    std::string digits;
    for (char c : text) {
      if (c != '_') digits += c;
    }
    std::int64_t integer = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), integer);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return integer;
    double floating = 0.0;
    auto [fptr, fec] = std::from_chars(digits.data(), digits.data() + digits.size(), floating);
    if (fec == std::errc() && fptr == digits.data() + digits.size() && std::isfinite(floating)) {
      return floating;
    }
  }
  return ExprLiteral{text};
}

std::string describe(const Literal& literal) {
  struct Visitor {
    std::string operator()(const NoneLiteral&) const { return "None"; }
    std::string operator()(bool b) const { return b ? "True" : "False"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
      std::string s(buf, ptr);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    std::string operator()(const std::string& s) const { return "'" + s + "'"; }
    std::string operator()(const ExprLiteral& e) const { return e.text; }
  };
  return std::visit(Visitor{}, literal);
}

Value Value::of(Literal literal) {
  Value v;
  v.kind = ValueKind::scalar;
  v.scalar = std::move(literal);
  return v;
}

Value Value::container(ValueKind kind, std::vector<Value> items) {
  Value v;
  v.kind = kind;
  v.items = std::move(items);
  return v;
}

Value Value::object(std::string class_id) {
  Value v;
  v.kind = ValueKind::object;
  v.type_name = std::move(class_id);
  return v;
}

Value Value::opaque() {
  Value v;
  v.kind = ValueKind::opaque;
  return v;
}

std::optional<std::vector<std::int64_t>> dims_of(const Value& value) {
  switch (value.kind) {
  case ValueKind::scalar:
    return std::vector<std::int64_t>{};
  case ValueKind::set:
    return std::vector<std::int64_t>{static_cast<std::int64_t>(value.items.size())};
  case ValueKind::dict:
    return std::vector<std::int64_t>{static_cast<std::int64_t>(value.items.size() / 2)};
  case ValueKind::list:
  case ValueKind::tuple:
  case ValueKind::array: {
    std::vector<std::int64_t> dims{static_cast<std::int64_t>(value.items.size())};
    if (value.items.empty()) return dims;
    std::optional<std::vector<std::int64_t>> inner;
    for (const auto& item : value.items) {
      std::optional<std::vector<std::int64_t>> d;
      if (item.is_sequence()) {
        d = dims_of(item);
        if (!d) return std::nullopt;
      } else if (item.is_scalar()) {
        d = std::vector<std::int64_t>{};
      } else {
        return std::nullopt;
      }
      if (!inner) {
        inner = d;
      } else if (*inner != *d) {
        return std::nullopt;
      }
    }
    dims.insert(dims.end(), inner->begin(), inner->end());
    return dims;
  }
  case ValueKind::object:
  case ValueKind::opaque:
    return std::nullopt;
  }
  return std::nullopt;
}

std::size_t depth_of(const Value& value) {
  if (!value.is_sequence()) return 0;
  if (value.items.empty()) return 1;
  return 1 + depth_of(value.items.front());
}

void collect_leaves(const Value& value, std::vector<const Literal*>& out) {
  switch (value.kind) {
  case ValueKind::scalar:
    out.push_back(&value.scalar);
    break;
  case ValueKind::dict:
    for (std::size_t i = 1; i < value.items.size(); i += 2) collect_leaves(value.items[i], out);
    break;
  case ValueKind::list:
  case ValueKind::tuple:
  case ValueKind::set:
  case ValueKind::array:
    for (const auto& item : value.items) collect_leaves(item, out);
    break;
  case ValueKind::object:
  case ValueKind::opaque:
    break;
  }
}

std::string describe(const Value& value) {
  auto seq = [&](const char* open, const char* close) {
    std::string out = open;
    for (std::size_t i = 0; i < value.items.size(); ++i) {
      if (i > 0) out += ", ";
      out += describe(value.items[i]);
    }
    if (value.kind == ValueKind::tuple && value.items.size() == 1) out += ",";
    return out + close;
  };
  switch (value.kind) {
  case ValueKind::scalar: return describe(value.scalar);
  case ValueKind::list: return seq("[", "]");
  case ValueKind::tuple: return seq("(", ")");
  case ValueKind::set: return value.items.empty() ? "set()" : seq("{", "}");
  case ValueKind::array: return "array(" + seq("[", "]") + ")";
  case ValueKind::dict: {
    std::string out = "{";
    for (std::size_t i = 0; i + 1 < value.items.size(); i += 2) {
      if (i > 0) out += ", ";
      out += describe(value.items[i]) + ": " + describe(value.items[i + 1]);
    }
    return out + "}";
  }
  case ValueKind::object: return "<" + value.type_name + " instance>";
  case ValueKind::opaque: return "<call result>";
  }
  return "?";
}

nlohmann::ordered_json literal_to_json(const Literal& literal) {
  using nlohmann::ordered_json;
  struct Visitor {
    ordered_json operator()(const NoneLiteral&) const { return {{"none", nullptr}}; }
    ordered_json operator()(bool b) const { return {{"bool", b}}; }
    ordered_json operator()(std::int64_t i) const { return {{"int", i}}; }
    ordered_json operator()(double d) const { return {{"float", d}}; }
    ordered_json operator()(const std::string& s) const { return {{"str", s}}; }
    ordered_json operator()(const ExprLiteral& e) const { return {{"expr", e.text}}; }
  };
  return std::visit(Visitor{}, literal);
}

Literal literal_from_json(const nlohmann::ordered_json& json) {
  if (!json.is_object() || json.size() != 1) {
    throw Error(ErrorKind::parse, "malformed literal: " + json.dump());
  }
  const auto entry = json.begin();
  const std::string& tag = entry.key();
  const auto& body = entry.value();
  if (tag == "none") return NoneLiteral{};
  if (tag == "bool" && body.is_boolean()) return body.get<bool>();
  if (tag == "int" && body.is_number_integer()) return body.get<std::int64_t>();
  if (tag == "float" && body.is_number()) return body.get<double>();
  if (tag == "str" && body.is_string()) return body.get<std::string>();
  if (tag == "expr" && body.is_string()) return ExprLiteral{body.get<std::string>()};
  throw Error(ErrorKind::parse, "malformed literal: " + json.dump());
}

namespace {

const char* kind_key(ValueKind kind) {
  switch (kind) {
  case ValueKind::list: return "list";
  case ValueKind::tuple: return "tuple";
  case ValueKind::set: return "set";
  case ValueKind::dict: return "dict";
  case ValueKind::array: return "array";
  case ValueKind::object: return "object";
  case ValueKind::opaque: return "opaque";
  case ValueKind::scalar: return "scalar";
  }
  return "?";
}

} // namespace

nlohmann::ordered_json value_to_json(const Value& value) {
  if (value.kind == ValueKind::scalar) return literal_to_json(value.scalar);
  if (value.kind == ValueKind::object) return {{"object", value.type_name}};
  if (value.kind == ValueKind::opaque) return {{"opaque", nullptr}};
  auto items = nlohmann::ordered_json::array();
  for (const auto& item : value.items) items.push_back(value_to_json(item));
  return {{kind_key(value.kind), std::move(items)}};
}

Value value_from_json(const nlohmann::ordered_json& json) {
  if (!json.is_object() || json.size() != 1) {
    throw Error(ErrorKind::parse, "malformed value: " + json.dump());
  }
  const auto entry = json.begin();
  const std::string& tag = entry.key();
  const auto& body = entry.value();
  if (tag == "object" && body.is_string()) return Value::object(body.get<std::string>());
  if (tag == "opaque") return Value::opaque();
  for (ValueKind kind : {ValueKind::list, ValueKind::tuple, ValueKind::set, ValueKind::dict,
                         ValueKind::array}) {
    if (tag == kind_key(kind)) {
      if (!body.is_array()) break;
      std::vector<Value> items;
      for (const auto& item : body) items.push_back(value_from_json(item));
      if (kind == ValueKind::dict && items.size() % 2 != 0) break;
      return Value::container(kind, std::move(items));
    }
  }
  return Value::of(literal_from_json(json));
}

} // namespace apiknow
