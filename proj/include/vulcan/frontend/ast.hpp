#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulcan/error.hpp"
#include "vulcan/frontend/source.hpp"
#include "vulcan/frontend/token.hpp"

namespace vulcan::frontend {

// The vocabulary module indexes on this enum; the set is closed.
enum class NodeKind : std::uint8_t {
  Module,
  FuncDecl,
  Param,
  Block,
  Assign,
  VarDecl,
  If,
  Loop,
  Return,
  ExprStmt,
  Call,
  BinOp,
  UnaryOp,
  Identifier,
  IntLit,
  BoolLit,
};

inline constexpr std::size_t kNodeKindCount = 16;

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view name);

bool is_statement(NodeKind kind);

/// Calls to these names are library calls, encoded like operators.
inline constexpr std::array<std::string_view, 5> kBuiltinFunctions = {
    "assert_nonzero", "ext_call", "hash", "min", "max"};

bool is_builtin(std::string_view name);
/// Fixed arity of a builtin; -1 if `name` is not a builtin.
int builtin_arity(std::string_view name);

using NodeId = std::uint32_t;

struct AstNode {
  NodeKind kind = NodeKind::Module;
  std::vector<NodeId> children;
  int line = 1;
  int column = 1;
  std::string op_text;  // BinOp / UnaryOp
  std::string name;     // Identifier / FuncDecl / Param / VarDecl
  std::string literal;  // IntLit / BoolLit source text
};

/*
 * Child layout per kind:
 *   Module    FuncDecl*
 *   FuncDecl  Param* Block
 *   Block     statement*
 *   Assign    Identifier(target) expr
 *   VarDecl   expr                      (name holds the declared variable)
 *   If        expr Block [Block]
 *   Loop      expr Block
 *   Return    expr
 *   ExprStmt  Call
 *   Call      Identifier(callee) expr*
 *   BinOp     expr expr
 *   UnaryOp   expr
 */
class Ast {
 public:
  NodeId root() const { return 0; }
  const AstNode& node(NodeId id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  std::optional<NodeId> parent(NodeId id) const;
  const std::map<std::string, NodeId>& functions() const { return functions_; }
  int line_count() const { return line_count_; }

  /// Statement nodes (and FuncDecl headers) whose first token is on `line`,
  /// in source order.
  std::vector<NodeId> nodes_starting_on(int line) const;
  /// Nearest FuncDecl ancestor (or the node itself).
  std::optional<NodeId> enclosing_function(NodeId id) const;
  /// Depth from the root (root = 0).
  int depth(NodeId id) const;

  /// Expression evaluated by a statement (value of Assign/VarDecl/Return,
  /// call of ExprStmt, condition of If/Loop); nullopt for other kinds.
  std::optional<NodeId> statement_expression(NodeId stmt) const;

  /// Variable written by an Assign / VarDecl / Param; empty otherwise.
  std::string written_name(NodeId stmt) const;

  /// Preorder list of every node id below (and including) `id`.
  std::vector<NodeId> preorder(NodeId id) const;

 private:
  friend class AstBuilder;

  std::vector<AstNode> nodes_;
  std::vector<NodeId> parent_;
  std::map<std::string, NodeId> functions_;
  std::vector<std::vector<NodeId>> starts_by_line_;  // index 0 unused
  int line_count_ = 1;
};

/// Incremental construction used by the parser; keeps parent links in sync.
class AstBuilder {
 public:
  AstBuilder();
  NodeId add(AstNode node);
  void add_child(NodeId parent, NodeId child);
  AstNode& at(NodeId id) { return ast_.nodes_.at(id); }
  void register_function(const std::string& name, NodeId decl);
  bool has_function(const std::string& name) const;
  int param_count(const std::string& function) const;
  NodeId root_id() const { return 0; }
  Ast finish(int line_count);

 private:
  Ast ast_;
};

class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

class MultipleStatementsError : public Error {
 public:
  explicit MultipleStatementsError(int line);
};

/// Builds an Ast from tokens. `line_count` defaults to the last token's line.
Ast parse(const std::vector<Token>& tokens, std::optional<int> line_count = std::nullopt);

/// tokenize + parse, with the line count taken from the text.
Ast parse_source(const SourceProgram& program);
Ast parse_source(std::string_view source);

/// The assignment or declaration whose first token is on `line`.
std::optional<NodeId> assignments_on_line(const Ast& ast, int line);

/// Canonical MiniSol text: four-space indents, one statement per line, a blank
/// line between functions, minimal parentheses. No trailing newline.
std::string pretty_print(const Ast& ast);

/// True when both trees agree on kinds, names, op texts, literals and child
/// order (line numbers are ignored).
bool structurally_equal(const Ast& a, const Ast& b);

}  // namespace vulcan::frontend
