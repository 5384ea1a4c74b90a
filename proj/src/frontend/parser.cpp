#include <string>

#include "vulcan/frontend/ast.hpp"

namespace vulcan::frontend {

namespace {

int binary_precedence(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  return -1;
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {}

  Ast run(std::optional<int> line_count) {
    while (!at_end()) parse_function();
    check_calls();
    int lines = line_count.value_or(tokens_.empty() ? 1 : tokens_.back().line);
    return builder_.finish(lines);
  }

 private:
  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
  AstBuilder builder_;
  std::vector<NodeId> calls_;

  bool at_end() const { return pos_ >= tokens_.size(); }

  const Token* peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? &tokens_[pos_ + ahead] : nullptr;
  }

  bool check(TokenKind kind, std::string_view text) const {
    const Token* t = peek();
    return t != nullptr && t->kind == kind && t->text == text;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    if (at_end()) {
      const int line = tokens_.empty() ? 1 : tokens_.back().line;
      const int col = tokens_.empty() ? 1 : tokens_.back().column + static_cast<int>(tokens_.back().text.size());
      throw ParseError(line, col, "expected " + expected + " but found end of input");
    }
    const Token& t = tokens_[pos_];
    throw ParseError(t.line, t.column, "expected " + expected + " but found '" + t.text + "'");
  }

  const Token& expect(TokenKind kind, std::string_view text) {
    if (!check(kind, text)) fail("'" + std::string(text) + "'");
    return tokens_[pos_++];
  }

  const Token& expect_identifier() {
    const Token* t = peek();
    if (t == nullptr || t->kind != TokenKind::Identifier) fail("identifier");
    return tokens_[pos_++];
  }

  NodeId make(NodeKind kind, const Token& at) {
    AstNode n;
    n.kind = kind;
    n.line = at.line;
    n.column = at.column;
    return builder_.add(std::move(n));
  }

  void parse_function() {
    const Token& kw = expect(TokenKind::Keyword, "func");
    const Token& name = expect_identifier();
    if (is_builtin(name.text)) {
      throw ParseError(name.line, name.column, "function name '" + name.text + "' shadows a builtin");
    }
    if (builder_.has_function(name.text)) {
      throw ParseError(name.line, name.column, "duplicate function '" + name.text + "'");
    }
    const NodeId decl = make(NodeKind::FuncDecl, kw);
    builder_.at(decl).name = name.text;
    builder_.add_child(builder_.root_id(), decl);
    builder_.register_function(name.text, decl);

    expect(TokenKind::Punct, "(");
    if (!check(TokenKind::Punct, ")")) {
      while (true) {
        const Token& p = expect_identifier();
        const NodeId param = make(NodeKind::Param, p);
        builder_.at(param).name = p.text;
        builder_.add_child(decl, param);
        if (!check(TokenKind::Punct, ",")) break;
        ++pos_;
      }
    }
    expect(TokenKind::Punct, ")");
    builder_.add_child(decl, parse_block());
  }

  NodeId parse_block() {
    const Token& open = expect(TokenKind::Punct, "{");
    const NodeId block = make(NodeKind::Block, open);
    while (!check(TokenKind::Punct, "}")) {
      if (at_end()) fail("'}'");
      builder_.add_child(block, parse_statement());
    }
    ++pos_;
    return block;
  }

  NodeId parse_statement() {
    const Token* t = peek();
    if (t->kind == TokenKind::Keyword) {
      if (t->text == "var") {
        const Token& kw = tokens_[pos_++];
        const Token& name = expect_identifier();
        const NodeId decl = make(NodeKind::VarDecl, kw);
        builder_.at(decl).name = name.text;
        expect(TokenKind::Operator, "=");
        builder_.add_child(decl, parse_expression());
        return decl;
      }
      if (t->text == "if") {
        const NodeId node = make(NodeKind::If, tokens_[pos_++]);
        builder_.add_child(node, parse_expression());
        builder_.add_child(node, parse_block());
        if (check(TokenKind::Keyword, "else")) {
          ++pos_;
          builder_.add_child(node, parse_block());
        }
        return node;
      }
      if (t->text == "while") {
        const NodeId node = make(NodeKind::Loop, tokens_[pos_++]);
        builder_.add_child(node, parse_expression());
        builder_.add_child(node, parse_block());
        return node;
      }
      if (t->text == "return") {
        const NodeId node = make(NodeKind::Return, tokens_[pos_++]);
        builder_.add_child(node, parse_expression());
        return node;
      }
      fail("statement");
    }
    if (t->kind == TokenKind::Identifier) {
      const Token* next = peek(1);
      if (next != nullptr && next->kind == TokenKind::Operator && next->text == "=") {
        const Token& target = tokens_[pos_];
        const NodeId node = make(NodeKind::Assign, target);
        const NodeId ident = make(NodeKind::Identifier, target);
        builder_.at(ident).name = target.text;
        builder_.add_child(node, ident);
        pos_ += 2;
        builder_.add_child(node, parse_expression());
        return node;
      }
      if (next != nullptr && next->kind == TokenKind::Punct && next->text == "(") {
        const NodeId node = make(NodeKind::ExprStmt, *t);
        builder_.add_child(node, parse_primary());
        return node;
      }
      ++pos_;
      fail("'=' or '('");
    }
    fail("statement");
  }

  NodeId parse_expression(int min_prec = 1) {
    NodeId lhs = parse_unary();
    while (true) {
      const Token* t = peek();
      if (t == nullptr || t->kind != TokenKind::Operator) break;
      const int prec = binary_precedence(t->text);
      if (prec < min_prec) break;
      const NodeId op = make(NodeKind::BinOp, *t);
      builder_.at(op).op_text = t->text;
      ++pos_;
      const NodeId rhs = parse_expression(prec + 1);
      builder_.add_child(op, lhs);
      builder_.add_child(op, rhs);
      lhs = op;
    }
    return lhs;
  }

  NodeId parse_unary() {
    const Token* t = peek();
    if (t != nullptr && t->kind == TokenKind::Operator && (t->text == "-" || t->text == "!")) {
      const NodeId op = make(NodeKind::UnaryOp, *t);
      builder_.at(op).op_text = t->text;
      ++pos_;
      builder_.add_child(op, parse_unary());
      return op;
    }
    return parse_primary();
  }

  NodeId parse_primary() {
    const Token* t = peek();
    if (t == nullptr) fail("expression");
    switch (t->kind) {
      case TokenKind::IntLiteral: {
        const NodeId n = make(NodeKind::IntLit, *t);
        builder_.at(n).literal = t->text;
        ++pos_;
        return n;
      }
      case TokenKind::BoolLiteral: {
        const NodeId n = make(NodeKind::BoolLit, *t);
        builder_.at(n).literal = t->text;
        ++pos_;
        return n;
      }
      case TokenKind::Identifier: {
        const Token& name = tokens_[pos_++];
        const NodeId ident = make(NodeKind::Identifier, name);
        builder_.at(ident).name = name.text;
        if (!check(TokenKind::Punct, "(")) return ident;
        const NodeId call = make(NodeKind::Call, name);
        builder_.add_child(call, ident);
        ++pos_;
        if (!check(TokenKind::Punct, ")")) {
          while (true) {
            builder_.add_child(call, parse_expression());
            if (!check(TokenKind::Punct, ",")) break;
            ++pos_;
          }
        }
        expect(TokenKind::Punct, ")");
        calls_.push_back(call);
        return call;
      }
      case TokenKind::Punct:
        if (t->text == "(") {
          ++pos_;
          const NodeId inner = parse_expression();
          expect(TokenKind::Punct, ")");
          return inner;
        }
        break;
      default:
        break;
    }
    fail("expression");
  }

  // Arity is checked for builtins and for callees declared in this module.
  void check_calls() {
    for (NodeId call : calls_) {
      const AstNode& c = builder_.at(call);
      const std::string callee = builder_.at(c.children.at(0)).name;
      const int got = static_cast<int>(c.children.size()) - 1;
      int want = builtin_arity(callee);
      if (want < 0 && builder_.has_function(callee)) {
        want = builder_.param_count(callee);
      }
      if (want >= 0 && want != got) {
        throw ParseError(c.line, c.column,
                         "call to '" + callee + "' expects " + std::to_string(want) + " arguments, got " +
                             std::to_string(got));
      }
    }
  }
};

}  // namespace

Ast parse(const std::vector<Token>& tokens, std::optional<int> line_count) {
  return Parser(tokens).run(line_count);
}

Ast parse_source(const SourceProgram& program) { return parse(tokenize(program.source), program.line_count()); }

Ast parse_source(std::string_view source) {
  int lines = 1;
  for (char c : source) lines += c == '\n' ? 1 : 0;
  return parse(tokenize(source), lines);
}

}  // namespace vulcan::frontend
