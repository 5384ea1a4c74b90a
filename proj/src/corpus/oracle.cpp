#include "vulcan/corpus/oracle.hpp"

#include "vulcan/deps/dependence.hpp"

namespace vulcan::corpus {

namespace {

using frontend::Ast;
using frontend::NodeId;
using frontend::NodeKind;

bool calls(const Ast& ast, NodeId expr, std::string_view callee) {
  for (NodeId id : ast.preorder(expr)) {
    const auto& n = ast.node(id);
    if (n.kind == NodeKind::Call && ast.node(n.children.front()).name == callee) return true;
  }
  return false;
}

// Statement that defines the variable read at `ident` on `line`, with its line.
std::optional<std::pair<NodeId, int>> definition_of(const Ast& ast, NodeId ident, int line) {
  const deps::TokenOccurrence occ{ast.node(ident).name, deps::TokenClass::Variable, ident, line};
  const deps::EndPoint ep = deps::resolve_endpoint(occ, line, ast);
  if (ep.is_none()) return std::nullopt;
  auto def = deps::defining_node(occ, ep, ast);
  if (!def) return std::nullopt;
  if (ast.node(*def).kind == NodeKind::Identifier) def = ast.parent(*def);
  return std::make_pair(*def, *ep.line);
}

bool guarded(const Ast& ast, NodeId ident, int line) {
  const auto def = definition_of(ast, ident, line);
  if (!def) return false;
  const auto expr = ast.statement_expression(def->first);
  if (!expr) return false;  // parameter
  if (calls(ast, *expr, "assert_nonzero")) return true;
  if (ast.node(*expr).kind == NodeKind::Identifier) return guarded(ast, *expr, def->second);
  return false;
}

bool defined_in_loop(const Ast& ast, NodeId ident, int line) {
  const auto def = definition_of(ast, ident, line);
  if (!def) return false;
  for (auto p = ast.parent(def->first); p; p = ast.parent(*p)) {
    const NodeKind k = ast.node(*p).kind;
    if (k == NodeKind::Loop) return true;
    if (k == NodeKind::If || k == NodeKind::FuncDecl) return false;
  }
  return false;
}

bool after_ext_call(const Ast& ast, NodeId stmt) {
  const auto block = ast.parent(stmt);
  if (!block) return false;
  for (NodeId sib : ast.node(*block).children) {
    if (sib == stmt) return false;
    const auto expr = ast.statement_expression(sib);
    if (expr && calls(ast, *expr, "ext_call")) return true;
  }
  return false;
}

bool unchecked_division(const Ast& ast, NodeId expr, int line) {
  for (NodeId id : ast.preorder(expr)) {
    const auto& n = ast.node(id);
    if (n.kind != NodeKind::BinOp || n.op_text != "/") continue;
    const auto& den = ast.node(n.children[1]);
    if (den.kind == NodeKind::IntLit) {
      if (den.literal.find_first_not_of('0') == std::string::npos) return true;
    } else if (den.kind != NodeKind::Identifier || !guarded(ast, n.children[1], line)) {
      return true;
    }
  }
  return false;
}

bool loop_overflow(const Ast& ast, NodeId expr, int line) {
  for (NodeId id : ast.preorder(expr)) {
    const auto& n = ast.node(id);
    if (n.kind != NodeKind::BinOp || n.op_text != "+") continue;
    for (NodeId c : n.children) {
      if (ast.node(c).kind == NodeKind::Identifier && defined_in_loop(ast, c, line)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<LabeledLine> oracle_labels(const Ast& ast) {
  std::vector<LabeledLine> out;
  for (int line = 1; line <= ast.line_count(); ++line) {
    const auto stmt = frontend::assignments_on_line(ast, line);
    if (!stmt) continue;
    const NodeId expr = *ast.statement_expression(*stmt);
    std::optional<VulnClass> vuln;
    if (after_ext_call(ast, *stmt)) {
      vuln = VulnClass::DeadAfterCall;
    } else if (unchecked_division(ast, expr, line)) {
      vuln = VulnClass::UncheckedDiv;
    } else if (loop_overflow(ast, expr, line)) {
      vuln = VulnClass::LoopOverflow;
    }
    out.push_back({line, vuln ? 1 : 0, vuln});
  }
  return out;
}

std::vector<LabeledLine> oracle_labels(const SourceProgram& program) {
  return oracle_labels(frontend::parse_source(program));
}

}  // namespace vulcan::corpus
