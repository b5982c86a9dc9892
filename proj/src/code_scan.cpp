#include "apiknow/code_scan.hpp"

#include "apiknow/error.hpp"
#include "apiknow/util.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace apiknow::code {

// ---------------------------------------------------------------------------
// tokenizer

namespace {

bool is_name_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view p) {
  if (p.size() > 2) return false;
  for (char c : p) {
    if (std::string_view("rRbBuUfF").find(c) == std::string_view::npos) return false;
  }
  return true;
}

// Strips doctest prompts (">>> ", "... ") at line starts, keeping offsets
// aligned by replacing them with spaces.
std::string strip_prompts(std::string_view source) {
  std::string out(source);
  std::size_t i = 0;
  while (i < out.size()) {
    std::size_t j = i;
    while (j < out.size() && (out[j] == ' ' || out[j] == '\t')) ++j;
    if (out.compare(j, 3, ">>>") == 0 || out.compare(j, 3, "...") == 0) {
      std::size_t k = j + 3;
      if (k >= out.size() || out[k] == ' ' || out[k] == '\n') {
        for (std::size_t m = j; m < k; ++m) out[m] = ' ';
      }
    }
    auto nl = out.find('\n', i);
    if (nl == std::string::npos) break;
    i = nl + 1;
  }
  return out;
}

} // namespace

std::vector<LogicalLine> tokenize(std::string_view raw) {
  std::string source = strip_prompts(raw);
  std::vector<LogicalLine> lines;
  LogicalLine current;
  int depth = 0;
  std::size_t i = 0;
  auto flush = [&] {
    if (!current.empty()) lines.push_back(std::move(current));
    current.clear();
  };
  while (i < source.size()) {
    unsigned char c = static_cast<unsigned char>(source[i]);
    if (c == '\n' || c == ';') {
      if (depth == 0) flush();
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
      ++i;
      continue;
    }
    if (c == '\\' && i + 1 < source.size() && source[i + 1] == '\n') {
      i += 2;
      continue;
    }
    if (c == '#') {
      while (i < source.size() && source[i] != '\n') ++i;
      continue;
    }
    // strings (with optional prefix)
    std::size_t prefix_end = i;
    while (prefix_end < source.size() && std::isalpha(static_cast<unsigned char>(source[prefix_end]))) {
      ++prefix_end;
    }
    bool string_start = false;
    if (prefix_end < source.size() && (source[prefix_end] == '\'' || source[prefix_end] == '"') &&
        is_string_prefix(std::string_view(source).substr(i, prefix_end - i))) {
      string_start = true;
    }
    if (c == '\'' || c == '"') {
      string_start = true;
      prefix_end = i;
    }
    if (string_start) {
      std::size_t start = i;
      char q = source[prefix_end];
      bool triple = source.compare(prefix_end, 3, std::string(3, q)) == 0;
      std::size_t j = prefix_end + (triple ? 3 : 1);
      bool closed = false;
      while (j < source.size()) {
        if (source[j] == '\\') {
          j += 2;
          continue;
        }
        if (!triple && source[j] == '\n') break;
        if (triple ? source.compare(j, 3, std::string(3, q)) == 0 : source[j] == q) {
          j += triple ? 3 : 1;
          closed = true;
          break;
        }
        ++j;
      }
      if (!closed) {
        throw Error(ErrorKind::parse, "unterminated string at offset " + std::to_string(start));
      }
      current.push_back({TokenKind::string, source.substr(start, j - start), start});
      i = j;
      continue;
    }
    if (is_name_start(c)) {
      std::size_t j = i;
      while (j < source.size() && is_name_char(static_cast<unsigned char>(source[j]))) ++j;
      current.push_back({TokenKind::name, source.substr(i, j - i), i});
      i = j;
      continue;
    }
    if (std::isdigit(c) || (c == '.' && i + 1 < source.size() && std::isdigit(static_cast<unsigned char>(source[i + 1])))) {
      std::size_t j = i;
      while (j < source.size()) {
        char d = source[j];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '.' || d == '_') {
          ++j;
        } else if ((d == '+' || d == '-') && (source[j - 1] == 'e' || source[j - 1] == 'E') &&
                   !(source.compare(i, 2, "0x") == 0 || source.compare(i, 2, "0X") == 0)) {
          ++j;
        } else {
          break;
        }
      }
      current.push_back({TokenKind::number, source.substr(i, j - i), i});
      i = j;
      continue;
    }
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') {
      if (--depth < 0) throw Error(ErrorKind::parse, "unbalanced bracket at offset " + std::to_string(i));
    }
    static constexpr std::string_view two_char[] = {"**", "//", "==", "!=", "<=", ">=", "->", ":=",
                                                    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "<<", ">>"};
    std::string op(1, static_cast<char>(c));
    for (auto t : two_char) {
      if (source.compare(i, 2, t) == 0) {
        op = std::string(t);
        break;
      }
    }
    current.push_back({TokenKind::op, op, i});
    i += op.size();
  }
  if (depth != 0) throw Error(ErrorKind::parse, "unbalanced brackets at end of fragment");
  flush();
  return lines;
}

// ---------------------------------------------------------------------------
// parser

std::optional<std::string> Expr::dotted() const {
  if (kind == Kind::name) return name;
  if (kind == Kind::attribute && !children.empty()) {
    auto base = children.front().dotted();
    if (base) return *base + "." + name;
  }
  return std::nullopt;
}

namespace {

struct ParseFailure {};

const std::set<std::string, std::less<>> kKeywordOps = {"and", "or", "in", "is", "not", "if", "else"};
const std::set<std::string, std::less<>> kBinaryOps = {"+", "-", "*", "/", "//", "%", "**", "@", "==", "!=", "<",
                                                       ">", "<=", ">=", "&", "|", "^", "<<", ">>"};

class LineParser {
public:
  explicit LineParser(const LogicalLine& tokens) : t_(tokens) {}

  bool done() const { return pos_ >= t_.size(); }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < t_.size() ? &t_[pos_ + ahead] : nullptr;
  }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t && t->kind == TokenKind::op && t->text == op;
  }
  bool at_name(std::string_view name, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t && t->kind == TokenKind::name && t->text == name;
  }
  void expect_op(std::string_view op) {
    if (!at_op(op)) throw ParseFailure{};
    ++pos_;
  }
  std::string expect_name() {
    const Token* t = peek();
    if (!t || t->kind != TokenKind::name) throw ParseFailure{};
    ++pos_;
    return t->text;
  }
  std::string dotted_name() {
    std::string out = expect_name();
    while (at_op(".")) {
      ++pos_;
      out += "." + expect_name();
    }
    return out;
  }

  Expr expression() {
    if (at_name("lambda")) {
      // lambda args: body
      Expr e;
      e.offset = peek()->offset;
      while (!done() && !at_op(":")) ++pos_;
      expect_op(":");
      e.children.push_back(expression());
      return e;
    }
    Expr lhs = unary();
    while (!done()) {
      const Token* t = peek();
      bool binop = (t->kind == TokenKind::op && kBinaryOps.count(t->text)) ||
                   (t->kind == TokenKind::name && kKeywordOps.count(t->text));
      if (!binop) break;
      ++pos_;
      if (t->text == "is" && at_name("not")) ++pos_;
      if (t->text == "not" && at_name("in")) ++pos_;
      Expr combined;
      combined.offset = lhs.offset;
      combined.children.push_back(std::move(lhs));
      combined.children.push_back(unary());
      lhs = std::move(combined);
    }
    return lhs;
  }

private:
  Expr unary() {
    if (at_op("-") || at_op("+") || at_op("~") || at_name("not") || at_name("await")) {
      bool negate = at_op("-");
      std::size_t offset = peek()->offset;
      ++pos_;
      Expr operand = unary();
      if (negate && operand.kind == Expr::Kind::literal) {
        if (auto* i = std::get_if<std::int64_t>(&operand.literal)) {
          *i = -*i;
          return operand;
        }
        if (auto* d = std::get_if<double>(&operand.literal)) {
          *d = -*d;
          return operand;
        }
      }
      Expr e;
      e.offset = offset;
      e.children.push_back(std::move(operand));
      return e;
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = atom();
    while (!done()) {
      if (at_op(".")) {
        ++pos_;
        const Token* t = peek();
        if (!t || t->kind != TokenKind::name) throw ParseFailure{};
        ++pos_;
        Expr attr;
        attr.kind = Expr::Kind::attribute;
        attr.name = t->text;
        attr.offset = t->offset;
        attr.children.push_back(std::move(e));
        e = std::move(attr);
      } else if (at_op("(")) {
        ++pos_;
        Expr call;
        call.kind = Expr::Kind::call;
        call.offset = e.offset;
        call.children.push_back(std::move(e));
        arguments(call);
        e = std::move(call);
      } else if (at_op("[")) {
        ++pos_;
        Expr sub;
        sub.offset = e.offset;
        sub.children.push_back(std::move(e));
        loose_until("]", sub);
        e = std::move(sub);
      } else {
        break;
      }
    }
    return e;
  }

  void arguments(Expr& call) {
    while (!at_op(")")) {
      if (done()) throw ParseFailure{};
      std::optional<std::string> keyword;
      if (at_op("*") || at_op("**")) {
        keyword = peek()->text;
        ++pos_;
      } else if (peek()->kind == TokenKind::name && at_op("=", 1)) {
        keyword = peek()->text;
        pos_ += 2;
      }
      Expr value = expression();
      if (at_name("for")) {
        // generator argument: f(x for x in y)
        Expr gen;
        gen.offset = value.offset;
        gen.children.push_back(std::move(value));
        loose_until(")", gen, /*consume=*/false);
        value = std::move(gen);
      }
      call.children.push_back(std::move(value));
      call.keywords.push_back(keyword);
      if (at_op(",")) {
        ++pos_;
      } else if (!at_op(")")) {
        throw ParseFailure{};
      }
    }
    ++pos_;
  }

  // Collects whatever expressions parse until the closing token, for
  // subscripts, comprehensions and other constructs we do not model.
  void loose_until(std::string_view close, Expr& into, bool consume = true) {
    int depth = 0;
    while (!done()) {
      const Token* t = peek();
      if (t->kind == TokenKind::op) {
        if (depth == 0 && t->text == close) break;
        if (t->text == "(" || t->text == "[" || t->text == "{") ++depth;
        if (t->text == ")" || t->text == "]" || t->text == "}") --depth;
      }
      std::size_t before = pos_;
      if (depth == 0 && (t->kind != TokenKind::op || t->text == "(" || t->text == "[" || t->text == "{" ||
                         t->text == "-")) {
        try {
          Expr sub = expression();
          into.children.push_back(std::move(sub));
          continue;
        } catch (const ParseFailure&) {
          pos_ = before;
        }
      }
      ++pos_;
    }
    if (done()) throw ParseFailure{};
    if (consume) ++pos_;
  }

  Expr atom() {
    const Token* t = peek();
    if (!t) throw ParseFailure{};
    Expr e;
    e.offset = t->offset;
    if (t->kind == TokenKind::name) {
      ++pos_;
      if (t->text == "None" || t->text == "True" || t->text == "False") {
        e.kind = Expr::Kind::literal;
        e.literal = parse_literal(t->text);
        return e;
      }
      if (kKeywordOps.count(t->text) || t->text == "for" || t->text == "lambda") throw ParseFailure{};
      e.kind = Expr::Kind::name;
      e.name = t->text;
      return e;
    }
    if (t->kind == TokenKind::number) {
      ++pos_;
      Literal lit = parse_literal(t->text);
      if (std::holds_alternative<ExprLiteral>(lit)) {
        e.kind = Expr::Kind::other; // complex / hex / octal: opaque number
        return e;
      }
      e.kind = Expr::Kind::literal;
      e.literal = lit;
      return e;
    }
    if (t->kind == TokenKind::string) {
      std::string joined;
      bool plain = true;
      while (peek() && peek()->kind == TokenKind::string) {
        const std::string& text = peek()->text;
        std::size_t q = text.find_first_of("'\"");
        std::string prefix = text.substr(0, q);
        if (prefix.find_first_of("bBfF") != std::string::npos) plain = false;
        std::string body = text.substr(q);
        bool triple = body.size() >= 6 && body.compare(0, 3, std::string(3, body[0])) == 0;
        if (triple) {
          joined += body.substr(3, body.size() - 6);
        } else {
          Literal lit = parse_literal(body);
          if (auto* s = std::get_if<std::string>(&lit)) {
            joined += *s;
          } else {
            joined += body.substr(1, body.size() - 2);
          }
        }
        ++pos_;
      }
      e.kind = plain ? Expr::Kind::literal : Expr::Kind::other;
      e.literal = joined;
      return e;
    }
    if (t->kind == TokenKind::op && (t->text == "(" || t->text == "[" || t->text == "{")) {
      std::string close = t->text == "(" ? ")" : t->text == "[" ? "]" : "}";
      ++pos_;
      return display(t->text, close, t->offset);
    }
    if (t->kind == TokenKind::op && t->text == "...") {
      ++pos_;
      return e;
    }
    throw ParseFailure{};
  }

  Expr display(const std::string& open, const std::string& close, std::size_t offset) {
    Expr e;
    e.kind = Expr::Kind::container;
    e.offset = offset;
    e.container = open == "[" ? ValueKind::list : open == "(" ? ValueKind::tuple : ValueKind::set;
    bool saw_comma = false;
    bool is_dict = false;
    std::size_t start = pos_;
    try {
      while (!at_op(close)) {
        if (done()) throw ParseFailure{};
        if (at_op("*") || at_op("**")) throw ParseFailure{};
        e.children.push_back(expression());
        if (open == "{" && at_op(":")) {
          ++pos_;
          is_dict = true;
          e.children.push_back(expression());
        }
        if (at_name("for")) throw ParseFailure{};
        if (at_op(",")) {
          saw_comma = true;
          ++pos_;
        } else if (!at_op(close)) {
          throw ParseFailure{};
        }
      }
      ++pos_;
    } catch (const ParseFailure&) {
      // comprehension or something else: keep sub-expressions only
      pos_ = start;
      Expr loose;
      loose.offset = offset;
      loose_until(close, loose);
      return loose;
    }
    if (is_dict) {
      e.container = ValueKind::dict;
    } else if (open == "{" && e.children.empty()) {
      e.container = ValueKind::dict;
    }
    if (open == "(" && e.children.size() == 1 && !saw_comma) {
      return std::move(e.children.front()); // parenthesised expression
    }
    return e;
  }

  const LogicalLine& t_;
  std::size_t pos_ = 0;
};

Statement parse_line(const LogicalLine& line) {
  LineParser p(line);
  Statement stmt;
  if (p.at_name("import")) {
    p.seek(1);
    stmt.kind = Statement::Kind::import_module;
    while (!p.done()) {
      std::string module = p.dotted_name();
      std::string alias;
      if (p.at_name("as")) {
        p.seek(p.pos() + 1);
        alias = p.expect_name();
      }
      stmt.names.emplace_back(module, alias);
      if (p.at_op(",")) p.seek(p.pos() + 1);
      else break;
    }
    return stmt;
  }
  if (p.at_name("from")) {
    p.seek(1);
    stmt.kind = Statement::Kind::import_from;
    std::string module;
    while (p.at_op(".")) {
      module += ".";
      p.seek(p.pos() + 1);
    }
    if (!p.at_name("import")) module += p.dotted_name();
    stmt.module = module;
    if (!p.at_name("import")) throw ParseFailure{};
    p.seek(p.pos() + 1);
    bool paren = p.at_op("(");
    if (paren) p.seek(p.pos() + 1);
    while (!p.done() && !p.at_op(")")) {
      if (p.at_op("*")) {
        stmt.names.emplace_back("*", "");
        p.seek(p.pos() + 1);
      } else {
        std::string name = p.expect_name();
        std::string alias;
        if (p.at_name("as")) {
          p.seek(p.pos() + 1);
          alias = p.expect_name();
        }
        stmt.names.emplace_back(name, alias);
      }
      if (p.at_op(",")) p.seek(p.pos() + 1);
      else break;
    }
    return stmt;
  }
  // simple assignment: name [, name]* = expr   (also chained a = b = expr)
  {
    std::size_t i = 0;
    std::vector<std::string> targets;
    bool ok = true;
    std::size_t last_eq = std::string::npos;
    while (i < line.size()) {
      if (line[i].kind != TokenKind::name) {
        ok = false;
        break;
      }
      targets.push_back(line[i].text);
      ++i;
      if (i < line.size() && line[i].kind == TokenKind::op && line[i].text == ",") {
        ++i;
        continue;
      }
      if (i < line.size() && line[i].kind == TokenKind::op && line[i].text == "=") {
        last_eq = i;
        ++i;
        // chained assignment: look for another "name =" ahead
        if (i + 1 < line.size() && line[i].kind == TokenKind::name && line[i + 1].kind == TokenKind::op &&
            line[i + 1].text == "=") {
          continue;
        }
      }
      break;
    }
    if (ok && last_eq != std::string::npos) {
      p.seek(last_eq + 1);
      stmt.kind = Statement::Kind::assign;
      stmt.targets = std::move(targets);
      stmt.exprs.push_back(p.expression());
      if (p.done()) return stmt;
      // trailing tuple: a = 1, 2
      if (p.at_op(",")) {
        Expr tuple;
        tuple.kind = Expr::Kind::container;
        tuple.container = ValueKind::tuple;
        tuple.offset = stmt.exprs.front().offset;
        tuple.children.push_back(std::move(stmt.exprs.front()));
        while (p.at_op(",")) {
          p.seek(p.pos() + 1);
          if (p.done()) break;
          tuple.children.push_back(p.expression());
        }
        stmt.exprs.front() = std::move(tuple);
        if (p.done()) return stmt;
      }
      throw ParseFailure{};
    }
  }
  // anything else: collect every expression that parses
  stmt.kind = Statement::Kind::expression;
  while (!p.done()) {
    std::size_t before = p.pos();
    try {
      stmt.exprs.push_back(p.expression());
      if (p.pos() == before) p.seek(before + 1);
    } catch (const ParseFailure&) {
      p.seek(before + 1);
    }
  }
  return stmt;
}

} // namespace

std::vector<Statement> parse(const std::vector<LogicalLine>& lines) {
  std::vector<Statement> out;
  for (const auto& line : lines) {
    try {
      out.push_back(parse_line(line));
    } catch (const ParseFailure&) {
      log().debug("code scan: statement at offset {} recovered loosely", line.front().offset);
      Statement loose;
      LineParser p(line);
      while (!p.done()) {
        std::size_t before = p.pos();
        try {
          loose.exprs.push_back(p.expression());
          if (p.pos() == before) p.seek(before + 1);
        } catch (const ParseFailure&) {
          p.seek(before + 1);
        }
      }
      out.push_back(std::move(loose));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// catalog

namespace {

bool looks_like_class(std::string_view id) {
  auto name = simple_name(id);
  return !name.empty() && std::isupper(static_cast<unsigned char>(name.front()));
}

} // namespace

ApiCatalog ApiCatalog::from_specs(const std::vector<ApiSpec>& specs) {
  ApiCatalog catalog;
  for (const auto& spec : specs) {
    catalog.specs_[spec.api_id] = spec;
    catalog.by_simple_[simple_name(spec.api_id)].push_back(spec.api_id);
  }
  for (auto& [name, ids] : catalog.by_simple_) std::sort(ids.begin(), ids.end());
  return catalog;
}

ApiCatalog ApiCatalog::from_ids(const std::vector<std::string>& ids) {
  std::set<std::string> all(ids.begin(), ids.end());
  std::vector<ApiSpec> specs;
  for (const auto& id : all) {
    ApiSpec spec;
    spec.api_id = id;
    std::string parent = parent_name(id);
    bool has_members = false;
    for (const auto& other : all) {
      if (other.size() > id.size() && other.starts_with(id) && other[id.size()] == '.') has_members = true;
    }
    if (has_members || looks_like_class(id)) {
      spec.kind = ApiKind::class_constructor;
    } else if (!parent.empty() && (all.count(parent) || looks_like_class(parent))) {
      spec.kind = ApiKind::method;
      spec.owner = parent;
    } else {
      spec.kind = ApiKind::free_function;
    }
    specs.push_back(std::move(spec));
  }
  return from_specs(specs);
}

bool ApiCatalog::contains(std::string_view id) const { return specs_.find(id) != specs_.end(); }

const ApiSpec* ApiCatalog::find(std::string_view id) const {
  auto it = specs_.find(id);
  return it == specs_.end() ? nullptr : &it->second;
}

bool ApiCatalog::is_class(std::string_view id) const {
  const ApiSpec* spec = find(id);
  return spec && spec->kind == ApiKind::class_constructor;
}

const std::vector<std::string>& ApiCatalog::with_simple_name(std::string_view name) const {
  static const std::vector<std::string> none;
  auto it = by_simple_.find(name);
  return it == by_simple_.end() ? none : it->second;
}

std::vector<std::string> ApiCatalog::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, spec] : specs_) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------------------
// resolution

namespace {

const std::set<std::string, std::less<>> kArrayConstructors = {
    "numpy.array", "numpy.asarray", "np.array", "np.asarray", "torch.tensor", "tensorflow.constant",
    "tf.constant", "jax.numpy.array", "jnp.array",
};

class Resolver {
public:
  Resolver(const ApiCatalog& catalog, std::string_view context_class)
      : catalog_(catalog), context_(context_class) {}

  void run(ScanResult& result) {
    for (auto& stmt : result.statements) {
      switch (stmt.kind) {
      case Statement::Kind::import_module:
        for (const auto& [module, alias] : stmt.names) {
          if (!alias.empty()) {
            aliases_[alias] = module;
          } else {
            auto head = module.substr(0, module.find('.'));
            aliases_[head] = head;
          }
        }
        break;
      case Statement::Kind::import_from:
        for (const auto& [name, alias] : stmt.names) {
          if (name == "*") continue;
          aliases_[alias.empty() ? name : alias] = stmt.module + "." + name;
        }
        break;
      case Statement::Kind::assign: {
        const Expr& value = stmt.exprs.front();
        collect(value, result.calls);
        auto type = type_of(value);
        auto literal = literal_of(value);
        for (const auto& target : stmt.targets) {
          types_.erase(target);
          literals_.erase(target);
        }
        if (stmt.targets.size() == 1) {
          if (type) types_[stmt.targets.front()] = *type;
          if (literal) literals_[stmt.targets.front()] = *literal;
        }
        break;
      }
      case Statement::Kind::expression:
        for (const auto& e : stmt.exprs) collect(e, result.calls);
        break;
      }
    }
    std::stable_sort(result.calls.begin(), result.calls.end(),
                     [](const CallSite& a, const CallSite& b) { return a.offset < b.offset; });
  }

private:
  std::string expand(const std::string& dotted) const {
    auto dot = dotted.find('.');
    std::string head = dotted.substr(0, dot);
    auto it = aliases_.find(head);
    if (it == aliases_.end()) return dotted;
    return dot == std::string::npos ? it->second : it->second + dotted.substr(dot);
  }

  std::optional<std::string> by_simple_name(const std::string& name, const std::string& qualifier) const {
    const auto& candidates = catalog_.with_simple_name(name);
    if (candidates.empty()) return std::nullopt;
    if (candidates.size() == 1) return candidates.front();
    if (!qualifier.empty()) {
      std::vector<std::string> matching;
      for (const auto& c : candidates) {
        if (c.ends_with("." + qualifier + "." + name)) matching.push_back(c);
      }
      if (matching.size() == 1) return matching.front();
    }
    if (!context_.empty()) {
      for (const auto& c : candidates) {
        const ApiSpec* spec = catalog_.find(c);
        if (spec && spec->owner && *spec->owner == context_) return c;
        if (c == context_) return c;
      }
    }
    log().debug("code scan: '{}' is ambiguous, picking {}", name, candidates.front());
    return candidates.front();
  }

  // Resolves the callee of a call expression to a known api id.
  std::optional<std::string> resolve_callee(const Expr& callee) const {
    if (auto dotted = callee.dotted()) {
      std::string full = expand(*dotted);
      if (catalog_.contains(full)) return full;
      if (callee.kind == Expr::Kind::attribute) {
        const Expr& receiver = callee.children.front();
        if (receiver.kind == Expr::Kind::name) {
          if (auto it = types_.find(receiver.name); it != types_.end()) {
            std::string method = it->second + "." + callee.name;
            if (catalog_.contains(method)) return method;
          }
        }
        return by_simple_name(callee.name, simple_name(expand(*receiver.dotted())));
      }
      return by_simple_name(callee.name, "");
    }
    if (callee.kind == Expr::Kind::attribute) {
      const Expr& receiver = callee.children.front();
      if (auto type = type_of(receiver)) {
        std::string method = *type + "." + callee.name;
        if (catalog_.contains(method)) return method;
      }
      return by_simple_name(callee.name, "");
    }
    return std::nullopt;
  }

  // Class an expression evaluates to, when known. Methods are assumed to
  // return their receiver (fluent estimator style: KMeans(...).fit(X)).
  std::optional<std::string> type_of(const Expr& e) const {
    if (e.kind == Expr::Kind::name) {
      auto it = types_.find(e.name);
      if (it != types_.end()) return it->second;
      return std::nullopt;
    }
    if (e.kind != Expr::Kind::call) return std::nullopt;
    auto id = resolve_callee(e.children.front());
    if (!id) return std::nullopt;
    const ApiSpec* spec = catalog_.find(*id);
    if (!spec) return std::nullopt;
    if (spec->kind == ApiKind::class_constructor) return spec->api_id;
    if (spec->kind == ApiKind::method && spec->owner) return *spec->owner;
    return std::nullopt;
  }

  std::optional<Value> literal_of(const Expr& e) const {
    switch (e.kind) {
    case Expr::Kind::literal:
      return Value::of(e.literal);
    case Expr::Kind::name: {
      auto it = literals_.find(e.name);
      if (it != literals_.end()) return it->second;
      return std::nullopt;
    }
    case Expr::Kind::container: {
      std::vector<Value> items;
      for (const auto& child : e.children) {
        auto v = literal_of(child);
        if (!v) return std::nullopt;
        items.push_back(std::move(*v));
      }
      return Value::container(e.container, std::move(items));
    }
    case Expr::Kind::call: {
      auto dotted = e.children.front().dotted();
      if (!dotted) return std::nullopt;
      std::string full = expand(*dotted);
      if (!kArrayConstructors.count(full) && !kArrayConstructors.count(*dotted)) return std::nullopt;
      if (e.children.size() < 2 || e.keywords.front().has_value()) return std::nullopt;
      auto inner = literal_of(e.children[1]);
      if (!inner || !inner->is_sequence()) return std::nullopt;
      inner->kind = ValueKind::array;
      return inner;
    }
    case Expr::Kind::attribute:
    case Expr::Kind::other:
      return std::nullopt;
    }
    return std::nullopt;
  }

  void collect(const Expr& e, std::vector<CallSite>& out) {
    if (e.kind == Expr::Kind::call) {
      if (auto id = resolve_callee(e.children.front())) {
        CallSite site;
        site.api_id = *id;
        site.call = &e;
        const Expr& callee = e.children.front();
        site.offset = callee.kind == Expr::Kind::attribute ? callee.offset : callee.offset;
        for (std::size_t i = 1; i < e.children.size(); ++i) site.literal_args.push_back(literal_of(e.children[i]));
        out.push_back(std::move(site));
      }
    }
    for (const auto& child : e.children) collect(child, out);
  }

  const ApiCatalog& catalog_;
  std::string context_;
  std::map<std::string, std::string> aliases_;
  std::map<std::string, std::string> types_;
  std::map<std::string, Value> literals_;
};

} // namespace

ScanResult scan(std::string_view source, const ApiCatalog& catalog, std::string_view context_class) {
  ScanResult result;
  result.statements = parse(tokenize(source));
  Resolver(catalog, context_class).run(result);
  return result;
}

} // namespace apiknow::code
