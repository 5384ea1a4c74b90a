#include <string>

#include "vulcan/frontend/ast.hpp"

namespace vulcan::frontend {

namespace {

int precedence_of(const AstNode& n) {
  if (n.kind != NodeKind::BinOp) return 100;
  const std::string& op = n.op_text;
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  return 6;
}

class Printer {
 public:
  explicit Printer(const Ast& ast) : ast_(ast) {}

  std::string run() {
    const auto& funcs = ast_.node(ast_.root()).children;
    for (std::size_t i = 0; i < funcs.size(); ++i) {
      if (i > 0) out_ += "\n";
      function(funcs[i]);
    }
    if (!out_.empty() && out_.back() == '\n') out_.pop_back();
    return out_;
  }

 private:
  const Ast& ast_;
  std::string out_;

  void line(int indent, const std::string& text) {
    out_.append(static_cast<std::size_t>(indent) * 4, ' ');
    out_ += text;
    out_ += '\n';
  }

  void function(NodeId id) {
    const AstNode& f = ast_.node(id);
    std::string header = "func " + f.name + "(";
    bool first = true;
    NodeId body = 0;
    for (NodeId c : f.children) {
      const AstNode& ch = ast_.node(c);
      if (ch.kind == NodeKind::Param) {
        if (!first) header += ", ";
        header += ch.name;
        first = false;
      } else {
        body = c;
      }
    }
    line(0, header + ") {");
    block_body(body, 1);
    line(0, "}");
  }

  void block_body(NodeId block, int indent) {
    for (NodeId s : ast_.node(block).children) statement(s, indent);
  }

  void statement(NodeId id, int indent) {
    const AstNode& s = ast_.node(id);
    switch (s.kind) {
      case NodeKind::VarDecl:
        line(indent, "var " + s.name + " = " + expr(s.children[0]));
        break;
      case NodeKind::Assign:
        line(indent, ast_.node(s.children[0]).name + " = " + expr(s.children[1]));
        break;
      case NodeKind::Return:
        line(indent, "return " + expr(s.children[0]));
        break;
      case NodeKind::ExprStmt:
        line(indent, expr(s.children[0]));
        break;
      case NodeKind::If:
        line(indent, "if " + expr(s.children[0]) + " {");
        block_body(s.children[1], indent + 1);
        if (s.children.size() > 2) {
          line(indent, "} else {");
          block_body(s.children[2], indent + 1);
        }
        line(indent, "}");
        break;
      case NodeKind::Loop:
        line(indent, "while " + expr(s.children[0]) + " {");
        block_body(s.children[1], indent + 1);
        line(indent, "}");
        break;
      default:
        break;
    }
  }

  std::string expr(NodeId id) const {
    const AstNode& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::IntLit:
      case NodeKind::BoolLit:
        return n.literal;
      case NodeKind::Identifier:
        return n.name;
      case NodeKind::Call: {
        std::string s = ast_.node(n.children[0]).name + "(";
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          if (i > 1) s += ", ";
          s += expr(n.children[i]);
        }
        return s + ")";
      }
      case NodeKind::UnaryOp: {
        const AstNode& operand = ast_.node(n.children[0]);
        const std::string inner = expr(n.children[0]);
        return n.op_text + (operand.kind == NodeKind::BinOp ? "(" + inner + ")" : inner);
      }
      case NodeKind::BinOp: {
        const int p = precedence_of(n);
        const AstNode& lhs = ast_.node(n.children[0]);
        const AstNode& rhs = ast_.node(n.children[1]);
        std::string l = expr(n.children[0]);
        std::string r = expr(n.children[1]);
        if (precedence_of(lhs) < p) l = "(" + l + ")";
        if (precedence_of(rhs) <= p) r = "(" + r + ")";
        return l + " " + n.op_text + " " + r;
      }
      default:
        return "?";
    }
  }
};

}  // namespace

std::string pretty_print(const Ast& ast) { return Printer(ast).run(); }

}  // namespace vulcan::frontend
