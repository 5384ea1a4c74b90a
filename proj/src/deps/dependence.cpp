#include "vulcan/deps/dependence.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace vulcan::deps {

using frontend::AstNode;

std::string_view to_string(TokenClass cls) {
  switch (cls) {
    case TokenClass::Operator: return "Operator";
    case TokenClass::BuiltinFunc: return "BuiltinFunc";
    case TokenClass::UserFunc: return "UserFunc";
    case TokenClass::Variable: return "Variable";
  }
  return "?";
}

std::optional<TokenClass> token_class_from_string(std::string_view name) {
  for (auto c : {TokenClass::Operator, TokenClass::BuiltinFunc, TokenClass::UserFunc, TokenClass::Variable}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string render_path(const AstPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    if (i > 0) out += ' ';
    out += frontend::to_string(path.steps[i].kind);
    out += path.steps[i].direction == Direction::Up ? '^' : '_';
  }
  return out;
}

NotAnAssignment::NotAnAssignment(int line)
    : Error(ErrorCategory::Data, "line " + std::to_string(line) + " has no assignment") {}

UnknownCallee::UnknownCallee(const std::string& name, int line)
    : Error(ErrorCategory::Data, "call to unknown function '" + name + "' on line " + std::to_string(line)) {}

namespace {

void collect(const Ast& ast, NodeId id, int line, std::vector<TokenOccurrence>& out) {
  const AstNode& n = ast.node(id);
  switch (n.kind) {
    case NodeKind::BinOp:
      collect(ast, n.children[0], line, out);
      out.push_back({n.op_text, TokenClass::Operator, id, line});
      collect(ast, n.children[1], line, out);
      break;
    case NodeKind::UnaryOp:
      out.push_back({n.op_text, TokenClass::Operator, id, line});
      collect(ast, n.children[0], line, out);
      break;
    case NodeKind::Call: {
      const NodeId callee = n.children[0];
      const std::string& name = ast.node(callee).name;
      if (frontend::is_builtin(name)) {
        out.push_back({name, TokenClass::BuiltinFunc, id, line});
      } else if (ast.functions().count(name) > 0) {
        out.push_back({name, TokenClass::UserFunc, callee, line});
      } else {
        throw UnknownCallee(name, line);
      }
      for (std::size_t i = 1; i < n.children.size(); ++i) collect(ast, n.children[i], line, out);
      break;
    }
    case NodeKind::Identifier:
      out.push_back({n.name, TokenClass::Variable, id, line});
      break;
    default:
      break;
  }
}

std::vector<TokenOccurrence> expression_tokens(const Ast& ast, NodeId stmt, int line) {
  std::vector<TokenOccurrence> out;
  if (auto expr = ast.statement_expression(stmt)) collect(ast, *expr, line, out);
  if (out.size() > kMaxTokensPerLine) out.resize(kMaxTokensPerLine);
  return out;
}

// Statement-level nodes below a function in source order, header params first.
std::vector<NodeId> definitions_in(const Ast& ast, NodeId func) {
  std::vector<NodeId> defs;
  for (NodeId id : ast.preorder(func)) {
    const NodeKind k = ast.node(id).kind;
    if (k == NodeKind::Param || k == NodeKind::Assign || k == NodeKind::VarDecl) defs.push_back(id);
  }
  return defs;
}

std::optional<NodeId> last_return(const Ast& ast, NodeId func) {
  std::optional<NodeId> best;
  for (NodeId id : ast.preorder(func)) {
    if (ast.node(id).kind == NodeKind::Return) best = id;  // preorder is source order
  }
  return best;
}

}  // namespace

std::optional<NodeId> representative_statement(const Ast& ast, int line) {
  if (auto a = frontend::assignments_on_line(ast, line)) return a;
  for (NodeId id : ast.nodes_starting_on(line)) {
    if (ast.statement_expression(id)) return id;
  }
  return std::nullopt;
}

std::vector<TokenOccurrence> rhs_tokens(const Ast& ast, int line) {
  const auto stmt = frontend::assignments_on_line(ast, line);
  if (!stmt) throw NotAnAssignment(line);
  return expression_tokens(ast, *stmt, line);
}

std::vector<TokenOccurrence> line_tokens(const Ast& ast, int line) {
  const auto stmt = representative_statement(ast, line);
  if (!stmt) return {};
  return expression_tokens(ast, *stmt, line);
}

TokenClass classify_token(const TokenOccurrence& occ, const Ast& ast) {
  const AstNode& n = ast.node(occ.node);
  switch (n.kind) {
    case NodeKind::BinOp:
    case NodeKind::UnaryOp:
      return TokenClass::Operator;
    case NodeKind::Call: {
      const std::string& name = ast.node(n.children[0]).name;
      if (frontend::is_builtin(name)) return TokenClass::BuiltinFunc;
      if (ast.functions().count(name) > 0) return TokenClass::UserFunc;
      throw UnknownCallee(name, occ.line);
    }
    case NodeKind::Identifier: {
      const auto parent = ast.parent(occ.node);
      const bool is_callee = parent && ast.node(*parent).kind == NodeKind::Call &&
                             ast.node(*parent).children.front() == occ.node;
      if (!is_callee) return TokenClass::Variable;
      if (frontend::is_builtin(n.name)) return TokenClass::BuiltinFunc;
      if (ast.functions().count(n.name) > 0) return TokenClass::UserFunc;
      throw UnknownCallee(n.name, occ.line);
    }
    default:
      throw std::invalid_argument("token occurrence does not point at a token node");
  }
}

EndPoint resolve_endpoint(const TokenOccurrence& occ, int line, const Ast& ast) {
  if (occ.cls == TokenClass::UserFunc) {
    const auto it = ast.functions().find(occ.text);
    if (it == ast.functions().end()) return EndPoint::none();
    const auto ret = last_return(ast, it->second);
    if (!ret) return EndPoint::none();
    return EndPoint::at(ast.node(*ret).line);
  }
  if (occ.cls != TokenClass::Variable) return EndPoint::none();
  const auto func = ast.enclosing_function(occ.node);
  if (!func) return EndPoint::none();
  std::optional<int> best;
  for (NodeId def : definitions_in(ast, *func)) {
    const int def_line = ast.node(def).line;
    if (def_line >= line || ast.written_name(def) != occ.text) continue;
    if (!best || def_line > *best) best = def_line;
  }
  return EndPoint{best};
}

EndPoint previous_statement_line(const Ast& ast, int line) {
  for (int l = line - 1; l >= 1; --l) {
    if (!ast.nodes_starting_on(l).empty()) return EndPoint::at(l);
  }
  return EndPoint::none();
}

std::optional<NodeId> defining_node(const TokenOccurrence& occ, EndPoint ep, const Ast& ast, EndpointPolicy policy) {
  if (ep.is_none()) return std::nullopt;
  const int target_line = *ep.line;
  if (policy == EndpointPolicy::PreviousLine) {
    const auto starts = ast.nodes_starting_on(target_line);
    if (starts.empty()) return std::nullopt;
    return starts.front();
  }
  if (occ.cls == TokenClass::UserFunc) {
    const auto it = ast.functions().find(occ.text);
    if (it == ast.functions().end()) return std::nullopt;
    const auto ret = last_return(ast, it->second);
    if (ret && ast.node(*ret).line == target_line) return ret;
    return std::nullopt;
  }
  const auto func = ast.enclosing_function(occ.node);
  if (!func) return std::nullopt;
  std::optional<NodeId> found;
  for (NodeId def : definitions_in(ast, *func)) {
    if (ast.node(def).line == target_line && ast.written_name(def) == occ.text) found = def;
  }
  if (!found) return std::nullopt;
  const AstNode& d = ast.node(*found);
  if (d.kind == NodeKind::Assign) return d.children.front();
  return found;
}

AstPath path_between(const Ast& ast, NodeId from, NodeId to) {
  std::vector<NodeId> up{from};
  for (auto p = ast.parent(from); p; p = ast.parent(*p)) up.push_back(*p);
  std::vector<NodeId> down{to};
  for (auto p = ast.parent(to); p; p = ast.parent(*p)) down.push_back(*p);

  // Strip the shared suffix (common ancestors) but keep the lowest one.
  std::size_t i = up.size();
  std::size_t j = down.size();
  assert(up.back() == down.back() && "nodes of one tree share the root");
  while (i > 0 && j > 0 && up[i - 1] == down[j - 1]) {
    --i;
    --j;
  }
  AstPath path;
  for (std::size_t k = 0; k <= i && k < up.size(); ++k) {
    path.steps.push_back({ast.node(up[k]).kind, Direction::Up});
  }
  for (std::size_t k = j; k-- > 0;) {
    path.steps.push_back({ast.node(down[k]).kind, Direction::Down});
  }
  return path;
}

AstPath extract_ast_path(const TokenOccurrence& occ, EndPoint ep, const Ast& ast, EndpointPolicy policy) {
  if (ep.is_none()) throw std::invalid_argument("extract_ast_path needs an end-point");
  const auto target = defining_node(occ, ep, ast, policy);
  if (!target) {
    throw Error(ErrorCategory::Internal,
                "no defining node for '" + occ.text + "' on line " + std::to_string(*ep.line));
  }
  return path_between(ast, occ.node, *target);
}

PathResult get_path(const TokenOccurrence& occ, int line, const Ast& ast, EndpointPolicy policy) {
  PathResult r;
  const TokenClass cls = classify_token(occ, ast);
  if (cls == TokenClass::Operator || cls == TokenClass::BuiltinFunc) {
    r.kind = PathResult::Kind::OneHot;
    return r;
  }
  r.endpoint = policy == EndpointPolicy::PreviousLine ? previous_statement_line(ast, line)
                                                      : resolve_endpoint(occ, line, ast);
  if (r.endpoint.is_none()) {
    r.kind = PathResult::Kind::Empty;
    return r;
  }
  r.kind = PathResult::Kind::Path;
  r.path = extract_ast_path(occ, r.endpoint, ast, policy);
  return r;
}

}  // namespace vulcan::deps
