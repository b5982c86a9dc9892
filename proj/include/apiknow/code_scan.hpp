#pragma once

#include "apiknow/api_model.hpp"
#include "apiknow/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/// Lightweight, paren-aware scanner for Python code fragments. It is not a
/// language front-end: it understands imports, simple assignments, call
/// chains and literal displays, and skips what it does not recognise.
namespace apiknow::code {

enum class TokenKind { name, number, string, op };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t offset; // byte offset in the source
};

using LogicalLine = std::vector<Token>;

/// Splits a fragment into logical lines (bracket-aware, comments and
/// doctest prompts removed). Throws Error(parse) on unterminated strings or
/// unbalanced brackets.
std::vector<LogicalLine> tokenize(std::string_view source);

struct Expr {
  enum class Kind { name, attribute, call, literal, container, other };

  Kind kind = Kind::other;
  std::string name;     // name, or attribute member
  Literal literal;      // literal
  ValueKind container = ValueKind::list;
  std::size_t offset = 0;
  /// attribute: [object]; call: [callee, args...]; container: items
  /// (dict: key, value alternating); other: sub-expressions.
  std::vector<Expr> children;
  /// call only: keyword per argument (parallel to children[1..]); "*" or
  /// "**" for unpacked arguments.
  std::vector<std::optional<std::string>> keywords;

  /// "a.b.c" for name/attribute chains, nullopt otherwise.
  std::optional<std::string> dotted() const;
};

struct Statement {
  enum class Kind { import_module, import_from, assign, expression };
  Kind kind = Kind::expression;
  std::string module;           // imports
  std::vector<std::pair<std::string, std::string>> names; // (name, alias)
  std::vector<std::string> targets; // assign
  std::vector<Expr> exprs;          // assign: [value]; expression: all parsed exprs
};

/// Parses logical lines into statements; lines that fail to parse are
/// recovered best-effort (sub-expressions are still collected).
std::vector<Statement> parse(const std::vector<LogicalLine>& lines);

/// Known APIs for resolution. Built from full specs (kinds, params) or from a
/// bare id list, in which case kinds are inferred from naming.
class ApiCatalog {
public:
  static ApiCatalog from_specs(const std::vector<ApiSpec>& specs);
  static ApiCatalog from_ids(const std::vector<std::string>& ids);

  bool empty() const noexcept { return specs_.empty(); }
  bool contains(std::string_view id) const;
  const ApiSpec* find(std::string_view id) const;
  bool is_class(std::string_view id) const;
  const std::vector<std::string>& with_simple_name(std::string_view name) const;
  std::vector<std::string> ids() const;

private:
  std::map<std::string, ApiSpec, std::less<>> specs_;
  std::map<std::string, std::vector<std::string>, std::less<>> by_simple_;
};

struct CallSite {
  std::string api_id;
  const Expr* call = nullptr; // points into the owning ScanResult
  std::size_t offset = 0;
  /// Argument values known to be literal (after variable substitution),
  /// parallel to the call's arguments.
  std::vector<std::optional<Value>> literal_args;
};

struct ScanResult {
  ScanResult() = default;
  ScanResult(ScanResult&&) = default;
  ScanResult& operator=(ScanResult&&) = default;
  ScanResult(const ScanResult&) = delete; // calls point into statements
  ScanResult& operator=(const ScanResult&) = delete;

  std::vector<Statement> statements;
  std::vector<CallSite> calls; // textual order
};

/// Tokenizes, parses and resolves every call to a known API. `context_class`
/// breaks ties between same-named methods of different classes.
/// Throws Error(parse) when the fragment cannot be tokenized.
ScanResult scan(std::string_view source, const ApiCatalog& catalog,
                std::string_view context_class = {});

} // namespace apiknow::code
