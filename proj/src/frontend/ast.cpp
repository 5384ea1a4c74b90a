#include "vulcan/frontend/ast.hpp"

#include <algorithm>
#include <stdexcept>

namespace vulcan::frontend {

namespace {

constexpr std::array<std::string_view, kNodeKindCount> kKindNames = {
    "Module", "FuncDecl", "Param",  "Block",    "Assign", "VarDecl", "If",         "Loop",
    "Return", "ExprStmt", "Call",   "BinOp",    "UnaryOp", "Identifier", "IntLit", "BoolLit"};

constexpr NodeId kNoParent = static_cast<NodeId>(-1);

}  // namespace

std::string_view to_string(NodeKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<NodeKind> node_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<NodeKind>(i);
  }
  return std::nullopt;
}

bool is_statement(NodeKind kind) {
  switch (kind) {
    case NodeKind::Assign:
    case NodeKind::VarDecl:
    case NodeKind::If:
    case NodeKind::Loop:
    case NodeKind::Return:
    case NodeKind::ExprStmt:
      return true;
    default:
      return false;
  }
}

bool is_builtin(std::string_view name) { return builtin_arity(name) >= 0; }

int builtin_arity(std::string_view name) {
  if (name == "assert_nonzero" || name == "ext_call" || name == "hash") return 1;
  if (name == "min" || name == "max") return 2;
  return -1;
}

std::optional<NodeId> Ast::parent(NodeId id) const {
  const NodeId p = parent_.at(id);
  if (p == kNoParent) return std::nullopt;
  return p;
}

std::vector<NodeId> Ast::nodes_starting_on(int line) const {
  if (line < 1 || line >= static_cast<int>(starts_by_line_.size())) return {};
  return starts_by_line_[static_cast<std::size_t>(line)];
}

std::optional<NodeId> Ast::enclosing_function(NodeId id) const {
  std::optional<NodeId> cur = id;
  while (cur) {
    if (nodes_[*cur].kind == NodeKind::FuncDecl) return cur;
    cur = parent(*cur);
  }
  return std::nullopt;
}

int Ast::depth(NodeId id) const {
  int d = 0;
  for (auto p = parent(id); p; p = parent(*p)) ++d;
  return d;
}

std::optional<NodeId> Ast::statement_expression(NodeId stmt) const {
  const AstNode& n = nodes_.at(stmt);
  switch (n.kind) {
    case NodeKind::Assign: return n.children.at(1);
    case NodeKind::VarDecl:
    case NodeKind::Return:
    case NodeKind::ExprStmt:
    case NodeKind::If:
    case NodeKind::Loop:
      return n.children.at(0);
    default:
      return std::nullopt;
  }
}

std::string Ast::written_name(NodeId stmt) const {
  const AstNode& n = nodes_.at(stmt);
  switch (n.kind) {
    case NodeKind::Assign: return nodes_.at(n.children.at(0)).name;
    case NodeKind::VarDecl:
    case NodeKind::Param:
      return n.name;
    default:
      return {};
  }
}

std::vector<NodeId> Ast::preorder(NodeId id) const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const NodeId cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    const auto& ch = nodes_[cur].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

AstBuilder::AstBuilder() {
  AstNode root;
  root.kind = NodeKind::Module;
  ast_.nodes_.push_back(std::move(root));
  ast_.parent_.push_back(kNoParent);
}

NodeId AstBuilder::add(AstNode node) {
  ast_.nodes_.push_back(std::move(node));
  ast_.parent_.push_back(kNoParent);
  return static_cast<NodeId>(ast_.nodes_.size() - 1);
}

void AstBuilder::add_child(NodeId parent, NodeId child) {
  ast_.nodes_.at(parent).children.push_back(child);
  ast_.parent_.at(child) = parent;
}

void AstBuilder::register_function(const std::string& name, NodeId decl) { ast_.functions_[name] = decl; }

bool AstBuilder::has_function(const std::string& name) const { return ast_.functions_.count(name) > 0; }

int AstBuilder::param_count(const std::string& function) const {
  const AstNode& decl = ast_.nodes_.at(ast_.functions_.at(function));
  int count = 0;
  for (NodeId c : decl.children) count += ast_.nodes_.at(c).kind == NodeKind::Param ? 1 : 0;
  return count;
}

Ast AstBuilder::finish(int line_count) {
  int max_line = 1;
  for (const auto& n : ast_.nodes_) max_line = std::max(max_line, n.line);
  ast_.line_count_ = std::max(line_count, max_line);
  ast_.starts_by_line_.assign(static_cast<std::size_t>(ast_.line_count_) + 1, {});
  for (NodeId id : ast_.preorder(ast_.root())) {
    const AstNode& n = ast_.nodes_[id];
    if (is_statement(n.kind) || n.kind == NodeKind::FuncDecl) {
      ast_.starts_by_line_[static_cast<std::size_t>(n.line)].push_back(id);
    }
  }
  return std::move(ast_);
}

ParseError::ParseError(int line, int column, const std::string& message)
    : Error(ErrorCategory::Data,
            "parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

MultipleStatementsError::MultipleStatementsError(int line)
    : Error(ErrorCategory::Data, "more than one assignment starts on line " + std::to_string(line)) {}

std::optional<NodeId> assignments_on_line(const Ast& ast, int line) {
  if (line < 1 || line > ast.line_count()) {
    throw std::out_of_range("line " + std::to_string(line) + " outside program of " +
                            std::to_string(ast.line_count()) + " lines");
  }
  std::optional<NodeId> found;
  for (NodeId id : ast.nodes_starting_on(line)) {
    const NodeKind k = ast.node(id).kind;
    if (k != NodeKind::Assign && k != NodeKind::VarDecl) continue;
    if (found) throw MultipleStatementsError(line);
    found = id;
  }
  return found;
}

namespace {

bool equal_subtree(const Ast& a, NodeId x, const Ast& b, NodeId y) {
  const AstNode& p = a.node(x);
  const AstNode& q = b.node(y);
  if (p.kind != q.kind || p.name != q.name || p.op_text != q.op_text || p.literal != q.literal ||
      p.children.size() != q.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < p.children.size(); ++i) {
    if (!equal_subtree(a, p.children[i], b, q.children[i])) return false;
  }
  return true;
}

}  // namespace

bool structurally_equal(const Ast& a, const Ast& b) { return equal_subtree(a, a.root(), b, b.root()); }

}  // namespace vulcan::frontend
