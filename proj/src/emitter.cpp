#include "apiknow/emitter.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace apiknow {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void unrenderable(const std::string& what) {
  throw Error(ErrorKind::generation, "cannot render " + what);
}

std::string render_string(const std::string& s) {
  std::string out = "'";
  for (unsigned char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20 || c == 0x7f) {
          out += fmt::format("\\x{:02x}", c);
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out + "'";
}

std::string render_float(double x) {
  if (std::isnan(x)) return "float('nan')";
  if (std::isinf(x)) return x > 0 ? "float('inf')" : "float('-inf')";
  std::string text = fmt::format("{}", x);
  if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
  return text;
}

std::string render_literal(const Literal& lit, const EmitStyle& style) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, NoneLiteral>) {
          return style.none_literal;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? style.true_literal : style.false_literal;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return render_float(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return render_string(v);
        } else {
          unrenderable("expression default '" + v.text + "'");
        }
      },
      lit);
}

std::string prefix_for(const Value& v) {
  switch (v.kind) {
    case ValueKind::scalar:
      switch (tag_of(v.scalar)) {
        case LiteralTag::none: return "none_";
        case LiteralTag::boolean: return "bool_";
        case LiteralTag::integer: return "int_";
        case LiteralTag::floating: return "float_";
        case LiteralTag::string: return "str_";
        case LiteralTag::expr: return "expr_";
      }
      break;
    case ValueKind::list:
    case ValueKind::array: return "list_";
    case ValueKind::tuple: return "tuple_";
    case ValueKind::set: return "set_";
    case ValueKind::dict: return "dict_";
    default: break;
  }
  return "var_";
}

bool is_call(const Statement& st) { return st.kind == StatementKind::construct || st.kind == StatementKind::call; }

bool is_free_call(const Statement& st) { return is_call(st) && !st.receiver_var; }

} // namespace

std::string render_value(const Value& value, const EmitStyle& style) {
  auto items = [&](std::string_view open, std::string_view close) {
    std::vector<std::string> parts;
    for (const auto& item : value.items) parts.push_back(render_value(item, style));
    return std::string(open) + join(parts, ", ") + std::string(close);
  };
  switch (value.kind) {
    case ValueKind::scalar: return render_literal(value.scalar, style);
    case ValueKind::list:
    case ValueKind::array: return items("[", "]");
    case ValueKind::tuple:
      if (value.items.size() == 1) return "(" + render_value(value.items.front(), style) + ",)";
      return items("(", ")");
    case ValueKind::set:
      if (value.items.empty()) return "set()";
      return items("{", "}");
    case ValueKind::dict: {
      std::vector<std::string> parts;
      for (std::size_t i = 0; i + 1 < value.items.size(); i += 2) {
        parts.push_back(render_value(value.items[i], style) + ": " + render_value(value.items[i + 1], style));
      }
      return "{" + join(parts, ", ") + "}";
    }
    case ValueKind::object: unrenderable("an object reference as a literal");
    case ValueKind::opaque: unrenderable("an opaque value as a literal");
  }
  unrenderable("value");
}

ModuleAliases module_aliases(const TestSuite& suite, const EmitStyle& style) {
  std::set<std::string> modules;
  for (const auto& test : suite.tests) {
    for (const auto& st : test.statements) {
      if (is_free_call(st)) modules.insert(parent_name(st.callee));
    }
  }
  ModuleAliases aliases;
  for (const auto& m : modules) aliases[m] = style.module_prefix + std::to_string(aliases.size());
  return aliases;
}

std::string emit_test(const TestCase& test, const EmitStyle& style) {
  TestSuite single;
  single.tests.push_back(test);
  return emit_test(test, module_aliases(single, style), style);
}

std::string emit_test(const TestCase& test, const ModuleAliases& aliases, const EmitStyle& style) {
  if (test.statements.empty()) throw Error(ErrorKind::generation, "cannot emit test " + test.id + " without statements");
  validate_structure(test);

  std::map<int, std::string> names;
  std::map<std::string, int> counters;
  auto define = [&](int var, const std::string& prefix) {
    auto name = prefix + std::to_string(counters[prefix]++);
    names[var] = name;
    return name;
  };
  auto arg_text = [&](const Arg& arg) {
    if (const auto* ref = std::get_if<VarRef>(&arg.value)) return names.at(ref->id);
    return render_value(std::get<Value>(arg.value), style);
  };

  std::set<std::string> imports;
  std::vector<std::string> body;
  for (const auto& st : test.statements) {
    switch (st.kind) {
      case StatementKind::assign_literal: {
        auto rendered = render_value(st.literal, style);
        body.push_back(define(*st.target_var, prefix_for(st.literal)) + " = " + rendered);
        break;
      }
      case StatementKind::construct:
      case StatementKind::call: {
        std::vector<std::pair<std::size_t, std::string>> positional;
        std::vector<std::string> keywords;
        for (const auto& arg : st.args) {
          if (std::holds_alternative<UseDefault>(arg.value)) continue;
          if (const auto* pos = std::get_if<std::size_t>(&arg.binding)) {
            positional.emplace_back(*pos, arg_text(arg));
          } else {
            keywords.push_back(std::get<std::string>(arg.binding) + "=" + arg_text(arg));
          }
        }
        std::stable_sort(positional.begin(), positional.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::string> args;
        for (auto& p : positional) args.push_back(std::move(p.second));
        args.insert(args.end(), keywords.begin(), keywords.end());
        std::string callee;
        if (st.receiver_var) {
          callee = names.at(*st.receiver_var) + "." + simple_name(st.callee);
        } else {
          auto module = parent_name(st.callee);
          auto it = aliases.find(module);
          if (module.empty() || it == aliases.end()) unrenderable("call to " + st.callee + " without a module alias");
          imports.insert("import " + module + " as " + it->second);
          callee = it->second + "." + simple_name(st.callee);
        }
        std::string line = callee + "(" + join(args, ", ") + ")";
        if (st.target_var) line = define(*st.target_var, style.object_prefix) + " = " + line;
        body.push_back(std::move(line));
        break;
      }
      case StatementKind::assert_not_none: {
        auto text = style.assertion;
        auto at = text.find("{}");
        text.replace(at, 2, names.at(*st.receiver_var));
        body.push_back(std::move(text));
        break;
      }
    }
  }

  // imports ordered by alias number
  std::vector<std::string> ordered(imports.begin(), imports.end());
  std::sort(ordered.begin(), ordered.end(), [&](const std::string& a, const std::string& b) {
    auto number = [](const std::string& line) {
      auto digits = line.substr(line.find_last_of('_') + 1);
      return std::stoll(digits);
    };
    return number(a) < number(b);
  });
  std::string out;
  for (const auto& line : ordered) out += line + "\n";
  out += "\n\ndef " + style.function_prefix + (test.id.empty() ? compute_test_id(test) : test.id) + "():\n";
  for (const auto& line : body) out += style.indent + line + "\n";
  return out;
}

std::string test_file_name(const TestSuite& suite, const TestCase& test) {
  std::string slug;
  for (char c : simple_name(suite.target)) {
    slug += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(static_cast<unsigned char>(c))) : '_';
  }
  if (slug.empty()) slug = "suite";
  return "test_" + slug + "_" + test.id + ".py";
}

std::vector<std::filesystem::path> emit_suite(const TestSuite& suite, const std::filesystem::path& out_dir,
                                              const EmitStyle& style) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());

  auto aliases = module_aliases(suite, style);
  std::vector<fs::path> written;
  json files = json::object();
  std::set<std::string> names;
  for (const auto& test : suite.tests) {
    auto name = test_file_name(suite, test);
    write_file(out_dir / name, emit_test(test, aliases, style));
    files[test.id] = name;
    names.insert(name);
    written.push_back(out_dir / name);
  }

  auto manifest_path = out_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    try {
      auto old = json::parse(read_file(manifest_path));
      for (const auto& [id, file] : old.at("files").items()) {
        auto name = file.get<std::string>();
        if (!names.count(name) && name.find('/') == std::string::npos) fs::remove(out_dir / name, ec);
      }
    } catch (const std::exception& e) {
      log().warn("ignoring unreadable previous manifest {}: {}", manifest_path.string(), e.what());
    }
  }
  json module_map = json::object();
  for (const auto& [module, alias] : aliases) module_map[module] = alias;
  json manifest{{"format", "apiknow-suite/1"},
                {"files", std::move(files)},
                {"modules", std::move(module_map)},
                {"suite", suite_to_json(suite)}};
  write_file(manifest_path, manifest.dump(2) + "\n");
  written.push_back(manifest_path);
  return written;
}

TestSuite load_suite(const std::filesystem::path& dir) {
  auto path = dir / "manifest.json";
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "missing suite manifest " + path.string());
  json manifest;
  try {
    manifest = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("suite")) {
    throw Error(ErrorKind::parse, path.string() + ": manifest has no suite");
  }
  return suite_from_json(manifest.at("suite"));
}

} // namespace apiknow
