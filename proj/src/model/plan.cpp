#include "vulcan/model/plan.hpp"

#include <algorithm>
#include <set>

namespace vulcan::model {

bool representable(const deps::Ast& ast, int line, const ModelConfig& cfg) {
  return line >= 1 && line <= ast.line_count() && line <= cfg.max_lines;
}

std::vector<TokenSlot> plan_slots(const deps::Ast& ast, int line, const deps::Vocab& vocab, const ModelConfig& cfg) {
  std::vector<TokenSlot> slots;
  for (const auto& tok : deps::line_tokens(ast, line)) {
    const auto res = deps::get_path(tok, line, ast, cfg.policy());
    TokenSlot s;
    switch (res.kind) {
      case deps::PathResult::Kind::OneHot:
        s.define = TokenSlot::Define::OneHot;
        s.index = vocab.define_index(tok);
        break;
      case deps::PathResult::Kind::Empty:
        s.define = TokenSlot::Define::Undefined;
        break;
      case deps::PathResult::Kind::Path:
        s.path = deps::encode_path(res.path, vocab).indices;
        if (representable(ast, *res.endpoint.line, cfg)) {
          s.define = TokenSlot::Define::Line;
          s.index = *res.endpoint.line;
        }
        break;
    }
    slots.push_back(std::move(s));
  }
  return slots;
}

namespace {

class Planner {
 public:
  Planner(const deps::Ast& ast, const deps::Vocab& vocab, const ModelConfig& cfg)
      : ast_(ast), vocab_(vocab), cfg_(cfg) {}

  int visit(int line, int depth) {
    if (const auto it = plan_.node_of_line.find(line); it != plan_.node_of_line.end()) return it->second;
    if (depth > cfg_.max_recursion_depth) throw RecursionDepthExceeded(line, depth);
    plan_.max_depth = std::max(plan_.max_depth, depth);
    in_progress_.insert(line);
    PlannedLine node;
    node.line = line;
    node.slots = cfg_.no_endpoints ? strip_defines(plan_slots(ast_, line, vocab_, cfg_))
                                   : plan_slots(ast_, line, vocab_, cfg_);
    node.deps.assign(node.slots.size(), -1);
    for (std::size_t i = 0; i < node.slots.size(); ++i) {
      auto& s = node.slots[i];
      if (s.define != TokenSlot::Define::Line) continue;
      if (in_progress_.count(s.index) > 0) {
        s.define = TokenSlot::Define::Undefined;
        s.index = 0;
        continue;
      }
      const int dep = visit(s.index, depth + 1);
      node.deps[i] = dep;
      node.level = std::max(node.level, plan_.nodes[static_cast<std::size_t>(dep)].level + 1);
    }
    in_progress_.erase(line);
    plan_.nodes.push_back(std::move(node));
    const int id = static_cast<int>(plan_.nodes.size()) - 1;
    plan_.node_of_line[line] = id;
    return id;
  }

  ProgramPlan take() { return std::move(plan_); }

 private:
  const deps::Ast& ast_;
  const deps::Vocab& vocab_;
  const ModelConfig& cfg_;
  ProgramPlan plan_;
  std::set<int> in_progress_;

  // Without end-points only the context half of each slot is used.
  static std::vector<TokenSlot> strip_defines(std::vector<TokenSlot> slots) {
    for (auto& s : slots) {
      s.define = TokenSlot::Define::Undefined;
      s.index = 0;
    }
    return slots;
  }
};

}  // namespace

ProgramPlan plan_program(const deps::Ast& ast, const std::vector<int>& targets, const deps::Vocab& vocab,
                         const ModelConfig& cfg) {
  Planner p(ast, vocab, cfg);
  for (int line : targets) {
    if (representable(ast, line, cfg)) p.visit(line, 1);
  }
  return p.take();
}

}  // namespace vulcan::model
