#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulcan/error.hpp"
#include "vulcan/frontend/ast.hpp"

namespace vulcan::deps {

using frontend::Ast;
using frontend::NodeId;
using frontend::NodeKind;

inline constexpr std::size_t kMaxTokensPerLine = 16;
inline constexpr std::size_t kMaxPathLength = 32;

enum class TokenClass { Operator, BuiltinFunc, UserFunc, Variable };

std::string_view to_string(TokenClass cls);
std::optional<TokenClass> token_class_from_string(std::string_view name);

struct TokenOccurrence {
  std::string text;
  TokenClass cls;
  NodeId node;  // Identifier for Variable/UserFunc, BinOp/UnaryOp for Operator, Call for BuiltinFunc
  int line;
};

/// Line of the most recent definition, or none.
struct EndPoint {
  std::optional<int> line;

  static EndPoint none() { return {}; }
  static EndPoint at(int l) { return {l}; }
  bool is_none() const { return !line.has_value(); }
  friend bool operator==(const EndPoint&, const EndPoint&) = default;
};

enum class Direction { Up, Down };

struct PathStep {
  NodeKind kind;
  Direction direction;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Walk from a token up to the lowest common ancestor, then down to the
/// defining node. Steps up to and including the ancestor are Up.
struct AstPath {
  std::vector<PathStep> steps;
  bool truncated = false;
  friend bool operator==(const AstPath&, const AstPath&) = default;
};

/// "Identifier^ BinOp^ ... Assign_ Identifier_" (used as a bag-of-paths feature).
std::string render_path(const AstPath& path);

/// How a Variable/UserFunc token finds the line it depends on.
enum class EndpointPolicy {
  MostRecentDefinition,  // the normal rule
  PreviousLine,          // ablation: always the preceding statement line
};

class NotAnAssignment : public Error {
 public:
  explicit NotAnAssignment(int line);
};

class UnknownCallee : public Error {
 public:
  UnknownCallee(const std::string& name, int line);
};

/// Operators, builtin calls, user calls and variable reads on the right of
/// '=' on `line`, left to right, capped at 16.
std::vector<TokenOccurrence> rhs_tokens(const Ast& ast, int line);

/// Same walk over the expression of any statement that starts on `line`
/// (assignment value, return value, call statement, branch/loop condition).
/// Empty for lines without such an expression (e.g. function headers).
std::vector<TokenOccurrence> line_tokens(const Ast& ast, int line);

/// The statement whose expression `line_tokens` reads, if any. Assignments
/// win over other statements on the same line.
std::optional<NodeId> representative_statement(const Ast& ast, int line);

TokenClass classify_token(const TokenOccurrence& occ, const Ast& ast);

EndPoint resolve_endpoint(const TokenOccurrence& occ, int line, const Ast& ast);

/// Node that a path to end-point `ep` terminates at: the defining Identifier
/// (Assign), the VarDecl or Param itself, or the callee's last Return.
std::optional<NodeId> defining_node(const TokenOccurrence& occ, EndPoint ep, const Ast& ast,
                                    EndpointPolicy policy = EndpointPolicy::MostRecentDefinition);

/// Raw (untruncated) path between two nodes of one tree.
AstPath path_between(const Ast& ast, NodeId from, NodeId to);

AstPath extract_ast_path(const TokenOccurrence& occ, EndPoint ep, const Ast& ast,
                         EndpointPolicy policy = EndpointPolicy::MostRecentDefinition);

struct PathResult {
  enum class Kind { OneHot, Path, Empty };
  EndPoint endpoint;
  Kind kind = Kind::Empty;
  AstPath path;  // Kind::Path only
};

PathResult get_path(const TokenOccurrence& occ, int line, const Ast& ast,
                    EndpointPolicy policy = EndpointPolicy::MostRecentDefinition);

/// Line of the last statement (or function header) strictly before `line`;
/// the end-point under EndpointPolicy::PreviousLine.
EndPoint previous_statement_line(const Ast& ast, int line);

}  // namespace vulcan::deps
