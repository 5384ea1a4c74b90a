#include "vulcan/deps/vocab.hpp"

#include <set>

namespace vulcan::deps {

namespace {

std::map<std::string, int> dense(const std::set<std::string>& items) {
  std::map<std::string, int> out;
  for (const auto& s : items) out.emplace(s, static_cast<int>(out.size()));
  return out;
}

int lookup(const std::map<std::string, int>& table, const std::string& key) {
  const auto it = table.find(key);
  return it == table.end() ? static_cast<int>(table.size()) : it->second;
}

std::string step_key(NodeKind kind, Direction dir) {
  return std::string(frontend::to_string(kind)) + (dir == Direction::Up ? "^" : "_");
}

}  // namespace

int Vocab::operator_index(const std::string& op) const { return lookup(operator_vocab, op); }

int Vocab::builtin_index(const std::string& name) const { return lookup(builtin_vocab, name); }

int Vocab::node_kind_index(const PathStep& step) const {
  const auto it = node_kind_vocab.find({step.kind, step.direction});
  return it == node_kind_vocab.end() ? node_kind_unk() : it->second;
}

int Vocab::define_index(const TokenOccurrence& occ) const {
  if (occ.cls == TokenClass::Operator) return operator_index(occ.text);
  return operator_size() + builtin_index(occ.text);
}

void to_json(nlohmann::json& j, const Vocab& v) {
  std::vector<std::string> ops(v.operator_vocab.size());
  for (const auto& [k, i] : v.operator_vocab) ops[static_cast<std::size_t>(i)] = k;
  std::vector<std::string> builtins(v.builtin_vocab.size());
  for (const auto& [k, i] : v.builtin_vocab) builtins[static_cast<std::size_t>(i)] = k;
  std::vector<std::string> kinds(v.node_kind_vocab.size());
  for (const auto& [k, i] : v.node_kind_vocab) kinds[static_cast<std::size_t>(i)] = step_key(k.first, k.second);
  j = nlohmann::json{{"operators", ops}, {"builtins", builtins}, {"node_kinds", kinds}};
}

void from_json(const nlohmann::json& j, Vocab& v) {
  v = Vocab{};
  for (const auto& s : j.at("operators")) v.operator_vocab.emplace(s.get<std::string>(), v.operator_unk());
  for (const auto& s : j.at("builtins")) v.builtin_vocab.emplace(s.get<std::string>(), v.builtin_unk());
  for (const auto& s : j.at("node_kinds")) {
    auto key = s.get<std::string>();
    if (key.size() < 2) throw Error(ErrorCategory::Data, "bad node kind entry '" + key + "'");
    const Direction dir = key.back() == '^' ? Direction::Up : Direction::Down;
    key.pop_back();
    const auto kind = frontend::node_kind_from_string(key);
    if (!kind) throw Error(ErrorCategory::Data, "unknown node kind '" + key + "'");
    v.node_kind_vocab.emplace(std::make_pair(*kind, dir), v.node_kind_unk());
  }
}

Vocab build_vocabs(const std::vector<const Ast*>& programs, EndpointPolicy policy) {
  std::set<std::string> ops;
  std::set<std::string> builtins;
  std::set<std::pair<NodeKind, Direction>> kinds;
  for (const Ast* ast : programs) {
    for (int line = 1; line <= ast->line_count(); ++line) {
      for (const auto& occ : line_tokens(*ast, line)) {
        if (occ.cls == TokenClass::Operator) {
          ops.insert(occ.text);
        } else if (occ.cls == TokenClass::BuiltinFunc) {
          builtins.insert(occ.text);
        } else {
          const PathResult r = get_path(occ, line, *ast, policy);
          for (const auto& step : r.path.steps) kinds.insert({step.kind, step.direction});
        }
      }
    }
  }
  Vocab v;
  v.operator_vocab = dense(ops);
  v.builtin_vocab = dense(builtins);
  for (const auto& k : kinds) v.node_kind_vocab.emplace(k, static_cast<int>(v.node_kind_vocab.size()));
  return v;
}

EncodedPath encode_path(const AstPath& path, const Vocab& vocab) {
  EncodedPath out;
  const auto& steps = path.steps;
  const std::size_t half = kMaxPathLength / 2;
  auto push = [&](std::size_t i) { out.indices.push_back(vocab.node_kind_index(steps[i])); };
  if (steps.size() <= kMaxPathLength) {
    for (std::size_t i = 0; i < steps.size(); ++i) push(i);
  } else {
    for (std::size_t i = 0; i < half; ++i) push(i);
    for (std::size_t i = steps.size() - half; i < steps.size(); ++i) push(i);
    out.truncated = true;
  }
  return out;
}

}  // namespace vulcan::deps
