#pragma once

#include <map>
#include <optional>
#include <vector>

#include "vulcan/deps/vocab.hpp"
#include "vulcan/model/config.hpp"

namespace vulcan::model {

class RecursionDepthExceeded : public Error {
 public:
  RecursionDepthExceeded(int line, int depth)
      : Error(ErrorCategory::Internal, "line representation recursion exceeded depth " + std::to_string(depth) +
                                           " at line " + std::to_string(line)) {}
};

/// What one right-hand-side token contributes to its line.
struct TokenSlot {
  enum class Define { OneHot, Undefined, Line };
  Define define = Define::Undefined;
  int index = 0;                          // OneHot: define-space row; Line: end-point line
  std::optional<std::vector<int>> path;  // encoded context path, Variable/UserFunc tokens with an end-point
  friend bool operator==(const TokenSlot&, const TokenSlot&) = default;
};

/// Token slots of `line` in left-to-right order (at most 16). End-points
/// beyond cfg.max_lines become Undefined.
std::vector<TokenSlot> plan_slots(const deps::Ast& ast, int line, const deps::Vocab& vocab, const ModelConfig& cfg);

/// Lines that may be represented: 1..min(line_count, max_lines).
bool representable(const deps::Ast& ast, int line, const ModelConfig& cfg);

/// A program's lines in dependency order: every Line slot of a node refers
/// to an earlier node. Slots that would re-enter a line still being planned
/// (a cycle through function returns) are turned into Undefined, exactly as
/// the depth-first recursion with an in-progress set would do when visiting
/// the targets in the given order.
struct PlannedLine {
  int line = 0;
  std::vector<TokenSlot> slots;
  std::vector<int> deps;  // per slot: node index for Line slots, -1 otherwise
  int level = 0;          // 0 without Line slots, else 1 + max level of deps
};

struct ProgramPlan {
  std::vector<PlannedLine> nodes;
  std::map<int, int> node_of_line;
  int max_depth = 0;  // deepest recursion reached while planning
};

ProgramPlan plan_program(const deps::Ast& ast, const std::vector<int>& targets, const deps::Vocab& vocab,
                         const ModelConfig& cfg);

}  // namespace vulcan::model
