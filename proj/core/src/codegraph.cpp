#include "ecpt/codegraph.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

namespace ecpt::code {

namespace {

struct ParseFailure {
  SourcePosition pos;
  std::string message;
};

constexpr int kMaxDepth = 200;

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) { tree_.tokens = std::move(tokens); }

  SyntaxTree run() {
    const auto first = pos_;
    std::vector<std::uint32_t> body;
    while (kind() != TokenKind::EndMarker) {
      if (kind() == TokenKind::Newline) {
        ++pos_;
        continue;
      }
      for (auto s : statement()) body.push_back(s);
    }
    tree_.root = make("module", std::move(body), first);
    return std::move(tree_);
  }

 private:
  const Token& tok(std::size_t offset = 0) const {
    const auto i = std::min(pos_ + offset, tree_.tokens.size() - 1);
    return tree_.tokens[i];
  }
  TokenKind kind() const { return tok().kind; }
  bool at_op(std::string_view s, std::size_t offset = 0) const {
    return tok(offset).kind == TokenKind::Op && tok(offset).text == s;
  }
  bool at_kw(std::string_view s) const {
    return tok().kind == TokenKind::Keyword && tok().text == s;
  }

  [[noreturn]] void fail(std::string msg) const { throw ParseFailure{tok().pos, std::move(msg)}; }

  void expect_op(std::string_view s) {
    if (!at_op(s)) fail("expected '" + std::string(s) + "'");
    ++pos_;
  }
  void expect_kw(std::string_view s) {
    if (!at_kw(s)) fail("expected '" + std::string(s) + "'");
    ++pos_;
  }
  void expect(TokenKind k, const char* what) {
    if (kind() != k) fail(std::string("expected ") + what);
    ++pos_;
  }

  std::uint32_t make(std::string kind, std::vector<std::uint32_t> children, std::size_t first,
                     std::string text = {}) {
    SyntaxNode n;
    n.kind = std::move(kind);
    n.children = std::move(children);
    n.first_token = static_cast<std::uint32_t>(first);
    n.last_token = static_cast<std::uint32_t>(std::max(pos_, first));
    n.text = std::move(text);
    tree_.nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(tree_.nodes.size() - 1);
  }

  // Consumes the current token as a leaf.
  std::uint32_t leaf(std::string kind) {
    const auto first = pos_;
    std::string text = tok().text;
    ++pos_;
    return make(std::move(kind), {}, first, std::move(text));
  }

  std::uint32_t op_leaf(std::string op, std::size_t first) { return make(op, {}, first, op); }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth) p.fail("nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
    Parser& p;
  };

  // ---- statements ----

  std::vector<std::uint32_t> statement() {
    DepthGuard guard(*this);
    if (kind() == TokenKind::Indent) fail("unexpected indent");
    if (at_kw("def")) return {funcdef()};
    if (at_kw("if")) return {if_stmt()};
    if (at_kw("for")) return {for_stmt()};
    if (at_kw("while")) return {while_stmt()};
    if (at_op("@")) fail("decorators are not supported");
    if (at_kw("class") || at_kw("try") || at_kw("with") || at_kw("async")) {
      fail("'" + tok().text + "' is not supported");
    }
    return simple_stmts();
  }

  std::vector<std::uint32_t> simple_stmts() {
    std::vector<std::uint32_t> out;
    out.push_back(small_stmt());
    while (at_op(";")) {
      ++pos_;
      if (kind() == TokenKind::Newline) break;
      out.push_back(small_stmt());
    }
    expect(TokenKind::Newline, "end of line");
    return out;
  }

  std::uint32_t small_stmt() {
    const auto first = pos_;
    if (at_kw("pass")) return leaf("pass_statement");
    if (at_kw("break")) return leaf("break_statement");
    if (at_kw("continue")) return leaf("continue_statement");
    if (at_kw("return")) {
      ++pos_;
      std::vector<std::uint32_t> kids;
      if (kind() != TokenKind::Newline && !at_op(";")) kids.push_back(testlist(true));
      return make("return_statement", std::move(kids), first);
    }
    if (at_kw("import")) return import_stmt();
    if (at_kw("from")) return import_from();
    if (kind() == TokenKind::Keyword && !at_kw("not") && !at_kw("True") && !at_kw("False") &&
        !at_kw("None")) {
      fail("'" + tok().text + "' is not supported");
    }
    return expr_stmt();
  }

  std::uint32_t expr_stmt() {
    const auto first = pos_;
    auto lhs = testlist(true);
    static constexpr std::string_view kAug[] = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                                ">>=", "<<=", "&=", "|=", "^=", "@="};
    for (auto op : kAug) {
      if (at_op(op)) {
        check_target(lhs, false);
        const auto op_first = pos_;
        ++pos_;
        auto op_node = op_leaf(std::string(op), op_first);
        auto rhs = testlist(false);
        auto aug = make("augmented_assignment", {lhs, op_node, rhs}, first);
        return make("expression_statement", {aug}, first);
      }
    }
    if (!at_op("=")) return make("expression_statement", {lhs}, first);
    std::vector<std::pair<std::uint32_t, std::size_t>> targets{{lhs, first}};
    std::uint32_t value = 0;
    for (;;) {
      ++pos_;  // '='
      const auto start = pos_;
      value = testlist(true);
      if (!at_op("=")) break;
      targets.emplace_back(value, start);
    }
    for (auto& [t, start] : targets) {
      (void)start;
      check_target(t, true);
    }
    for (auto it = targets.rbegin(); it != targets.rend(); ++it) {
      value = make("assignment", {it->first, value}, it->second);
    }
    return make("expression_statement", {value}, first);
  }

  void check_target(std::uint32_t node, bool allow_unpack) const {
    const auto& n = tree_.nodes[node];
    if (n.kind == "identifier" || n.kind == "attribute" || n.kind == "subscript") return;
    if (allow_unpack && (n.kind == "expression_list" || n.kind == "tuple" || n.kind == "list" ||
                         n.kind == "parenthesized_expression")) {
      for (auto c : n.children) check_target(c, true);
      return;
    }
    if (allow_unpack && n.kind == "list_splat") {
      check_target(n.children.at(0), false);
      return;
    }
    throw ParseFailure{tree_.tokens[n.first_token].pos, "cannot assign to " + n.kind};
  }

  std::uint32_t dotted_name() {
    const auto first = pos_;
    std::vector<std::uint32_t> parts;
    if (kind() != TokenKind::Name) fail("expected module name");
    parts.push_back(leaf("identifier"));
    while (at_op(".")) {
      ++pos_;
      if (kind() != TokenKind::Name) fail("expected name after '.'");
      parts.push_back(leaf("identifier"));
    }
    return make("dotted_name", std::move(parts), first);
  }

  std::uint32_t maybe_alias(std::uint32_t name, std::size_t first) {
    if (!at_kw("as")) return name;
    ++pos_;
    if (kind() != TokenKind::Name) fail("expected alias name");
    auto alias = leaf("identifier");
    return make("aliased_import", {name, alias}, first);
  }

  std::uint32_t import_stmt() {
    const auto first = pos_;
    expect_kw("import");
    std::vector<std::uint32_t> kids;
    do {
      if (!kids.empty()) ++pos_;
      const auto start = pos_;
      kids.push_back(maybe_alias(dotted_name(), start));
    } while (at_op(","));
    return make("import_statement", std::move(kids), first);
  }

  std::uint32_t import_from() {
    const auto first = pos_;
    expect_kw("from");
    std::uint32_t module;
    if (at_op(".") || at_op("...")) {
      const auto start = pos_;
      std::string dots;
      while (at_op(".") || at_op("...")) {
        dots += tok().text;
        ++pos_;
      }
      auto prefix = make("import_prefix", {}, start, dots);
      std::vector<std::uint32_t> kids{prefix};
      if (kind() == TokenKind::Name) kids.push_back(dotted_name());
      module = make("relative_import", std::move(kids), start);
    } else {
      module = dotted_name();
    }
    expect_kw("import");
    std::vector<std::uint32_t> kids{module};
    if (at_op("*")) {
      kids.push_back(leaf("wildcard_import"));
      return make("import_from_statement", std::move(kids), first);
    }
    const bool paren = at_op("(");
    if (paren) ++pos_;
    for (;;) {
      const auto start = pos_;
      if (kind() != TokenKind::Name) fail("expected imported name");
      auto name = make("dotted_name", {leaf("identifier")}, start);
      kids.push_back(maybe_alias(name, start));
      if (!at_op(",")) break;
      ++pos_;
      if (paren && at_op(")")) break;
    }
    if (paren) expect_op(")");
    return make("import_from_statement", std::move(kids), first);
  }

  std::uint32_t block() {
    expect_op(":");
    const auto first = pos_;
    std::vector<std::uint32_t> body;
    if (kind() == TokenKind::Newline) {
      ++pos_;
      expect(TokenKind::Indent, "an indented block");
      while (kind() != TokenKind::Dedent && kind() != TokenKind::EndMarker) {
        for (auto s : statement()) body.push_back(s);
      }
      expect(TokenKind::Dedent, "dedent");
    } else {
      body = simple_stmts();
    }
    return make("block", std::move(body), first);
  }

  std::uint32_t funcdef() {
    const auto first = pos_;
    expect_kw("def");
    if (kind() != TokenKind::Name) fail("expected function name");
    auto name = leaf("identifier");
    auto params = parameters();
    if (at_op("->")) fail("annotations are not supported");
    auto body = block();
    return make("function_definition", {name, params, body}, first);
  }

  std::uint32_t parameters() {
    const auto first = pos_;
    expect_op("(");
    std::vector<std::uint32_t> kids;
    while (!at_op(")")) {
      const auto start = pos_;
      if (at_op("*") || at_op("**")) {
        const bool dict = at_op("**");
        ++pos_;
        if (kind() != TokenKind::Name) fail("expected parameter name");
        auto id = leaf("identifier");
        kids.push_back(make(dict ? "dictionary_splat_pattern" : "list_splat_pattern", {id}, start));
      } else {
        if (kind() != TokenKind::Name) fail("expected parameter name");
        auto id = leaf("identifier");
        if (at_op(":")) fail("annotations are not supported");
        if (at_op("=")) {
          ++pos_;
          auto value = test();
          kids.push_back(make("default_parameter", {id, value}, start));
        } else {
          kids.push_back(id);
        }
      }
      if (!at_op(",")) break;
      ++pos_;
    }
    expect_op(")");
    return make("parameters", std::move(kids), first);
  }

  std::uint32_t if_stmt() {
    const auto first = pos_;
    expect_kw("if");
    std::vector<std::uint32_t> kids{test()};
    kids.push_back(block());
    while (at_kw("elif")) {
      const auto start = pos_;
      ++pos_;
      auto cond = test();
      auto body = block();
      kids.push_back(make("elif_clause", {cond, body}, start));
    }
    if (auto e = else_clause()) kids.push_back(*e);
    return make("if_statement", std::move(kids), first);
  }

  std::optional<std::uint32_t> else_clause() {
    if (!at_kw("else")) return std::nullopt;
    const auto start = pos_;
    ++pos_;
    auto body = block();
    return make("else_clause", {body}, start);
  }

  std::uint32_t for_stmt() {
    const auto first = pos_;
    expect_kw("for");
    const auto tstart = pos_;
    std::vector<std::uint32_t> targets{target_item()};
    bool comma = false;
    while (at_op(",")) {
      comma = true;
      ++pos_;
      if (at_kw("in")) break;
      targets.push_back(target_item());
    }
    auto target = comma ? make("expression_list", std::move(targets), tstart) : targets[0];
    check_target(target, true);
    expect_kw("in");
    std::vector<std::uint32_t> kids{target, testlist(false)};
    kids.push_back(block());
    if (auto e = else_clause()) kids.push_back(*e);
    return make("for_statement", std::move(kids), first);
  }

  std::uint32_t target_item() {
    if (at_op("*")) {
      const auto start = pos_;
      ++pos_;
      auto inner = bitor_expr();
      return make("list_splat", {inner}, start);
    }
    return bitor_expr();
  }

  std::uint32_t while_stmt() {
    const auto first = pos_;
    expect_kw("while");
    std::vector<std::uint32_t> kids{test()};
    kids.push_back(block());
    if (auto e = else_clause()) kids.push_back(*e);
    return make("while_statement", std::move(kids), first);
  }

  // ---- expressions ----

  bool at_expr_end() const {
    return kind() == TokenKind::Newline || kind() == TokenKind::EndMarker || at_op(")") ||
           at_op("]") || at_op("}") || at_op("=") || at_op(":") || at_op(";");
  }

  std::uint32_t star_or_test(bool allow_star) {
    if (allow_star && at_op("*")) {
      const auto start = pos_;
      ++pos_;
      auto inner = bitor_expr();
      return make("list_splat", {inner}, start);
    }
    return test();
  }

  std::uint32_t testlist(bool allow_star) {
    const auto first = pos_;
    std::vector<std::uint32_t> items{star_or_test(allow_star)};
    bool comma = false;
    while (at_op(",")) {
      comma = true;
      ++pos_;
      if (at_expr_end() || (kind() == TokenKind::Op && tok().text.size() >= 2 &&
                            tok().text.back() == '=' && tok().text != "==" &&
                            tok().text != "<=" && tok().text != ">=" && tok().text != "!=")) {
        break;
      }
      items.push_back(star_or_test(allow_star));
    }
    if (!comma) return items[0];
    return make("expression_list", std::move(items), first);
  }

  std::uint32_t test() {
    DepthGuard guard(*this);
    if (at_kw("lambda")) fail("lambda is not supported");
    const auto first = pos_;
    auto body = or_test();
    if (!at_kw("if")) return body;
    ++pos_;
    auto cond = or_test();
    expect_kw("else");
    auto other = test();
    return make("conditional_expression", {body, cond, other}, first);
  }

  std::uint32_t or_test() { return bool_chain("or", [this] { return and_test(); }); }
  std::uint32_t and_test() { return bool_chain("and", [this] { return not_test(); }); }

  template <class F>
  std::uint32_t bool_chain(std::string_view word, F next) {
    const auto first = pos_;
    auto left = next();
    while (at_kw(word)) {
      const auto op_first = pos_;
      ++pos_;
      auto op = op_leaf(std::string(word), op_first);
      auto right = next();
      left = make("boolean_operator", {left, op, right}, first);
    }
    return left;
  }

  std::uint32_t not_test() {
    if (at_kw("not")) {
      DepthGuard guard(*this);
      const auto first = pos_;
      ++pos_;
      auto inner = not_test();
      return make("not_operator", {inner}, first);
    }
    return comparison();
  }

  std::optional<std::string> comparison_op() {
    static constexpr std::string_view kOps[] = {"<", ">", "==", ">=", "<=", "!="};
    for (auto op : kOps) {
      if (at_op(op)) {
        ++pos_;
        return std::string(op);
      }
    }
    if (at_kw("in")) {
      ++pos_;
      return "in";
    }
    if (at_kw("not") && tok(1).kind == TokenKind::Keyword && tok(1).text == "in") {
      pos_ += 2;
      return "not in";
    }
    if (at_kw("is")) {
      ++pos_;
      if (at_kw("not")) {
        ++pos_;
        return "is not";
      }
      return "is";
    }
    return std::nullopt;
  }

  std::uint32_t comparison() {
    const auto first = pos_;
    std::vector<std::uint32_t> kids{bitor_expr()};
    for (;;) {
      const auto op_first = pos_;
      auto op = comparison_op();
      if (!op) break;
      kids.push_back(op_leaf(*op, op_first));
      kids.push_back(bitor_expr());
    }
    if (kids.size() == 1) return kids[0];
    return make("comparison_operator", std::move(kids), first);
  }

  template <class F>
  std::uint32_t binary_chain(std::initializer_list<std::string_view> ops, F next) {
    const auto first = pos_;
    auto left = next();
    for (;;) {
      std::string_view matched;
      for (auto op : ops) {
        if (at_op(op)) matched = op;
      }
      if (matched.empty()) return left;
      const auto op_first = pos_;
      ++pos_;
      auto op = op_leaf(std::string(matched), op_first);
      auto right = next();
      left = make("binary_operator", {left, op, right}, first);
    }
  }

  std::uint32_t bitor_expr() { return binary_chain({"|"}, [this] { return xor_expr(); }); }
  std::uint32_t xor_expr() { return binary_chain({"^"}, [this] { return and_expr(); }); }
  std::uint32_t and_expr() { return binary_chain({"&"}, [this] { return shift_expr(); }); }
  std::uint32_t shift_expr() { return binary_chain({"<<", ">>"}, [this] { return arith(); }); }
  std::uint32_t arith() { return binary_chain({"+", "-"}, [this] { return term(); }); }
  std::uint32_t term() {
    return binary_chain({"*", "/", "//", "%", "@"}, [this] { return factor(); });
  }

  std::uint32_t factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      DepthGuard guard(*this);
      const auto first = pos_;
      auto op = leaf(tok().text);
      auto operand = factor();
      return make("unary_operator", {op, operand}, first);
    }
    return power();
  }

  std::uint32_t power() {
    const auto first = pos_;
    auto base = primary();
    if (!at_op("**")) return base;
    const auto op_first = pos_;
    ++pos_;
    auto op = op_leaf("**", op_first);
    auto exponent = factor();
    return make("binary_operator", {base, op, exponent}, first);
  }

  std::uint32_t primary() {
    const auto first = pos_;
    auto node = atom();
    for (;;) {
      if (at_op("(")) {
        auto args = argument_list();
        node = make("call", {node, args}, first);
      } else if (at_op("[")) {
        ++pos_;
        std::vector<std::uint32_t> kids{node};
        for (;;) {
          kids.push_back(subscript_item());
          if (!at_op(",")) break;
          ++pos_;
          if (at_op("]")) break;
        }
        expect_op("]");
        node = make("subscript", std::move(kids), first);
      } else if (at_op(".")) {
        ++pos_;
        if (kind() != TokenKind::Name) fail("expected attribute name");
        auto name = leaf("identifier");
        node = make("attribute", {node, name}, first);
      } else {
        return node;
      }
    }
  }

  std::uint32_t subscript_item() {
    const auto first = pos_;
    std::vector<std::uint32_t> parts;
    std::string layout;
    auto slice_end = [&] { return at_op(":") || at_op("]") || at_op(","); };
    if (!at_op(":")) {
      auto e = test();
      if (!at_op(":")) return e;
      parts.push_back(e);
      layout += 'x';
    }
    for (int colons = 0; colons < 2 && at_op(":"); ++colons) {
      ++pos_;
      layout += ':';
      if (!slice_end()) {
        parts.push_back(test());
        layout += 'x';
      }
    }
    return make("slice", std::move(parts), first, layout);
  }

  std::uint32_t argument_list() {
    const auto first = pos_;
    expect_op("(");
    std::vector<std::uint32_t> kids;
    while (!at_op(")")) {
      const auto start = pos_;
      if (at_op("*") || at_op("**")) {
        const bool dict = at_op("**");
        ++pos_;
        auto inner = test();
        kids.push_back(make(dict ? "dictionary_splat" : "list_splat", {inner}, start));
      } else if (kind() == TokenKind::Name && at_op("=", 1)) {
        auto name = leaf("identifier");
        ++pos_;
        auto value = test();
        kids.push_back(make("keyword_argument", {name, value}, start));
      } else {
        kids.push_back(test());
        if (at_kw("for") || at_kw("async")) fail("comprehensions are not supported");
      }
      if (!at_op(",")) break;
      ++pos_;
    }
    expect_op(")");
    return make("argument_list", std::move(kids), first);
  }

  std::vector<std::uint32_t> sequence_items(std::string_view close, bool& trailing_comma,
                                            std::size_t& count) {
    std::vector<std::uint32_t> items;
    trailing_comma = false;
    while (!at_op(close)) {
      items.push_back(star_or_test(true));
      if (at_kw("for") || at_kw("async")) fail("comprehensions are not supported");
      trailing_comma = false;
      if (!at_op(",")) break;
      ++pos_;
      trailing_comma = true;
    }
    count = items.size();
    return items;
  }

  std::uint32_t atom() {
    DepthGuard guard(*this);
    const auto first = pos_;
    const Token& t = tok();
    switch (t.kind) {
      case TokenKind::Name:
        return leaf("identifier");
      case TokenKind::Number: {
        const auto& s = t.text;
        const bool hex = s.size() > 1 && s[0] == '0' &&
                         std::string_view("xXoObB").find(s[1]) != std::string_view::npos;
        const bool is_float = !hex && s.find_first_of(".eEjJ") != std::string::npos;
        return leaf(is_float ? "float" : "integer");
      }
      case TokenKind::String: {
        std::vector<std::uint32_t> parts;
        while (kind() == TokenKind::String) parts.push_back(leaf("string"));
        if (parts.size() == 1) return parts[0];
        return make("concatenated_string", std::move(parts), first);
      }
      case TokenKind::Keyword:
        if (t.text == "True") return leaf("true");
        if (t.text == "False") return leaf("false");
        if (t.text == "None") return leaf("none");
        fail("unexpected keyword '" + t.text + "'");
      case TokenKind::Op:
        break;
      default:
        fail("unexpected end of line");
    }
    if (at_op("...")) return leaf("ellipsis");
    if (at_op("(")) {
      ++pos_;
      if (at_op(")")) {
        ++pos_;
        return make("tuple", {}, first);
      }
      if (at_kw("yield")) fail("yield is not supported");
      bool trailing = false;
      std::size_t count = 0;
      auto items = sequence_items(")", trailing, count);
      expect_op(")");
      if (count == 1 && !trailing) {
        if (tree_.nodes[items[0]].kind == "list_splat") fail("cannot use starred expression here");
        return make("parenthesized_expression", std::move(items), first);
      }
      return make("tuple", std::move(items), first);
    }
    if (at_op("[")) {
      ++pos_;
      bool trailing = false;
      std::size_t count = 0;
      auto items = sequence_items("]", trailing, count);
      expect_op("]");
      return make("list", std::move(items), first);
    }
    if (at_op("{")) {
      ++pos_;
      if (at_op("}")) {
        ++pos_;
        return make("dictionary", {}, first);
      }
      const bool is_dict = at_op("**") || dict_ahead();
      std::vector<std::uint32_t> items;
      if (is_dict) {
        while (!at_op("}")) {
          const auto start = pos_;
          if (at_op("**")) {
            ++pos_;
            auto inner = bitor_expr();
            items.push_back(make("dictionary_splat", {inner}, start));
          } else {
            auto key = test();
            expect_op(":");
            auto value = test();
            items.push_back(make("pair", {key, value}, start));
          }
          if (at_kw("for") || at_kw("async")) fail("comprehensions are not supported");
          if (!at_op(",")) break;
          ++pos_;
        }
        expect_op("}");
        return make("dictionary", std::move(items), first);
      }
      bool trailing = false;
      std::size_t count = 0;
      items = sequence_items("}", trailing, count);
      expect_op("}");
      return make("set", std::move(items), first);
    }
    fail("unexpected '" + t.text + "'");
  }

  // After '{': is the first element followed by ':' at bracket depth 0?
  bool dict_ahead() const {
    int depth = 0;
    for (std::size_t i = pos_; i < tree_.tokens.size(); ++i) {
      const auto& t = tree_.tokens[i];
      if (t.kind != TokenKind::Op) continue;
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      else if (t.text == ")" || t.text == "]" || t.text == "}") {
        if (depth == 0) return false;
        --depth;
      } else if (depth == 0 && (t.text == ":" || t.text == ",")) {
        return t.text == ":";
      }
    }
    return false;
  }

  SyntaxTree tree_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

// ---- printing ----

class Printer {
 public:
  explicit Printer(const SyntaxTree& t) : t_(t) {}

  std::string module() {
    for (auto c : t_.root_node().children) stmt(c, 0);
    return std::move(out_);
  }

 private:
  const SyntaxNode& n(std::uint32_t i) const { return t_.nodes[i]; }

  void line(int indent, const std::string& s) {
    out_.append(static_cast<std::size_t>(indent) * 4, ' ');
    out_ += s;
    out_ += '\n';
  }

  void block(std::uint32_t b, int indent) {
    for (auto c : n(b).children) stmt(c, indent + 1);
  }

  void stmt(std::uint32_t i, int indent) {
    const auto& node = n(i);
    const auto& k = node.kind;
    if (k == "function_definition") {
      line(indent, "def " + expr(node.children[0]) + "(" + join(node.children[1], ", ") + "):");
      block(node.children[2], indent);
    } else if (k == "if_statement") {
      line(indent, "if " + expr(node.children[0]) + ":");
      block(node.children[1], indent);
      for (std::size_t c = 2; c < node.children.size(); ++c) clause(node.children[c], indent);
    } else if (k == "for_statement") {
      line(indent, "for " + expr(node.children[0]) + " in " + expr(node.children[1]) + ":");
      block(node.children[2], indent);
      if (node.children.size() > 3) clause(node.children[3], indent);
    } else if (k == "while_statement") {
      line(indent, "while " + expr(node.children[0]) + ":");
      block(node.children[1], indent);
      if (node.children.size() > 2) clause(node.children[2], indent);
    } else {
      line(indent, simple(i));
    }
  }

  void clause(std::uint32_t i, int indent) {
    const auto& node = n(i);
    if (node.kind == "elif_clause") {
      line(indent, "elif " + expr(node.children[0]) + ":");
      block(node.children[1], indent);
    } else {
      line(indent, "else:");
      block(node.children[0], indent);
    }
  }

  std::string simple(std::uint32_t i) {
    const auto& node = n(i);
    const auto& k = node.kind;
    if (k == "expression_statement") return expr(node.children[0]);
    if (k == "pass_statement") return "pass";
    if (k == "break_statement") return "break";
    if (k == "continue_statement") return "continue";
    if (k == "return_statement") {
      return node.children.empty() ? "return" : "return " + expr(node.children[0]);
    }
    if (k == "import_statement") return "import " + join(i, ", ");
    if (k == "import_from_statement") {
      std::string s = "from " + expr(node.children[0]) + " import ";
      for (std::size_t c = 1; c < node.children.size(); ++c) {
        if (c > 1) s += ", ";
        s += expr(node.children[c]);
      }
      return s;
    }
    return expr(i);
  }

  std::string join(std::uint32_t parent, std::string_view sep, std::size_t from = 0) {
    std::string s;
    const auto& kids = n(parent).children;
    for (std::size_t c = from; c < kids.size(); ++c) {
      if (c > from) s += sep;
      s += expr(kids[c]);
    }
    return s;
  }

  std::string expr(std::uint32_t i) {
    const auto& node = n(i);
    const auto& k = node.kind;
    const auto& c = node.children;
    if (node.leaf() && k != "tuple" && k != "list" && k != "dictionary" && k != "set" &&
        k != "slice" && k != "argument_list" && k != "parameters") {
      return node.text;
    }
    if (k == "assignment") return expr(c[0]) + " = " + expr(c[1]);
    if (k == "augmented_assignment") return expr(c[0]) + " " + expr(c[1]) + " " + expr(c[2]);
    if (k == "binary_operator" || k == "boolean_operator") {
      return expr(c[0]) + " " + expr(c[1]) + " " + expr(c[2]);
    }
    if (k == "comparison_operator") return join(i, " ");
    if (k == "unary_operator") return expr(c[0]) + expr(c[1]);
    if (k == "not_operator") return "not " + expr(c[0]);
    if (k == "conditional_expression") {
      return expr(c[0]) + " if " + expr(c[1]) + " else " + expr(c[2]);
    }
    if (k == "call") return expr(c[0]) + "(" + join(c[1], ", ") + ")";
    if (k == "attribute") return expr(c[0]) + "." + expr(c[1]);
    if (k == "subscript") return expr(c[0]) + "[" + join(i, ", ", 1) + "]";
    if (k == "slice") {
      std::string s;
      std::size_t part = 0;
      for (char ch : node.text) {
        if (ch == 'x') s += expr(c[part++]);
        else s += ':';
      }
      return s;
    }
    if (k == "keyword_argument" || k == "default_parameter") return expr(c[0]) + "=" + expr(c[1]);
    if (k == "list_splat" || k == "list_splat_pattern") return "*" + expr(c[0]);
    if (k == "dictionary_splat" || k == "dictionary_splat_pattern") return "**" + expr(c[0]);
    if (k == "parenthesized_expression") return "(" + expr(c[0]) + ")";
    if (k == "tuple") return "(" + join(i, ", ") + (c.size() == 1 ? ",)" : ")");
    if (k == "expression_list") return join(i, ", ") + (c.size() == 1 ? "," : "");
    if (k == "list") return "[" + join(i, ", ") + "]";
    if (k == "set" || k == "dictionary") return "{" + join(i, ", ") + "}";
    if (k == "pair") return expr(c[0]) + ": " + expr(c[1]);
    if (k == "concatenated_string") return join(i, " ");
    if (k == "dotted_name") return join(i, ".");
    if (k == "aliased_import") return expr(c[0]) + " as " + expr(c[1]);
    if (k == "relative_import") return join(i, "");
    return join(i, " ");
  }

  const SyntaxTree& t_;
  std::string out_;
};

}  // namespace

std::vector<std::uint32_t> SyntaxTree::preorder() const {
  std::vector<std::uint32_t> order;
  if (nodes.empty()) return order;
  order.reserve(nodes.size());
  std::vector<std::uint32_t> stack{root};
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    order.push_back(i);
    const auto& kids = nodes[i].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::vector<std::uint32_t> SyntaxTree::parents() const {
  std::vector<std::uint32_t> parent(nodes.size(), root);
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    for (auto c : nodes[i].children) parent[c] = i;
  }
  return parent;
}

std::size_t SyntaxTree::height(std::uint32_t i) const {
  // Children always precede their parent in the node vector.
  std::vector<std::size_t> h(i + 1, 1);
  for (std::uint32_t j = 0; j <= i; ++j) {
    for (auto c : nodes[j].children) h[j] = std::max(h[j], h[c] + 1);
  }
  return h[i];
}

ParseOutcome parse(std::string_view code) {
  ParseOutcome out;
  LexResult lexed = lex_python(code);
  if (!lexed.ok()) {
    out.error_position = lexed.error;
    out.message = lexed.message;
    return out;
  }
  try {
    out.tree = Parser(std::move(lexed.tokens)).run();
    out.ok = true;
  } catch (const ParseFailure& f) {
    out.error_position = f.pos;
    out.message = f.message;
  }
  return out;
}

std::map<std::string, std::size_t> subtree_multiset(const SyntaxTree& tree,
                                                    std::size_t min_height) {
  std::map<std::string, std::size_t> out;
  std::vector<std::string> canon(tree.nodes.size());
  std::vector<std::size_t> height(tree.nodes.size(), 1);
  for (std::uint32_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (node.leaf()) {
      canon[i] = node.kind;
    } else {
      std::string s = "(" + node.kind;
      for (auto c : node.children) {
        s += ' ';
        s += canon[c];
        height[i] = std::max(height[i], height[c] + 1);
      }
      s += ')';
      canon[i] = std::move(s);
    }
  }
  for (auto i : tree.preorder()) {
    if (height[i] >= min_height) ++out[canon[i]];
  }
  return out;
}

std::string canonical_subtree(const SyntaxTree& tree, std::uint32_t node) {
  const auto& n = tree.nodes.at(node);
  if (n.leaf()) return n.kind;
  std::string s = "(" + n.kind;
  for (auto c : n.children) s += " " + canonical_subtree(tree, c);
  return s + ")";
}

std::string pretty_print(const SyntaxTree& tree) { return Printer(tree).module(); }

std::string to_sexpr(const SyntaxTree& tree) {
  std::function<void(std::uint32_t, std::string&)> rec = [&](std::uint32_t i, std::string& s) {
    const auto& n = tree.nodes[i];
    s += "(" + n.kind;
    if (n.leaf() && !n.text.empty() && n.text != n.kind) {
      s += ' ';
      s += nlohmann::json(n.text).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    }
    for (auto c : n.children) {
      s += ' ';
      rec(c, s);
    }
    s += ')';
  };
  std::string s;
  if (!tree.nodes.empty()) rec(tree.root, s);
  return s;
}

}  // namespace ecpt::code
