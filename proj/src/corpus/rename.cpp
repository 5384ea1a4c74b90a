#include "vulcan/corpus/rename.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "vulcan/frontend/ast.hpp"
#include "vulcan/frontend/token.hpp"

namespace vulcan::corpus {

SourceProgram alpha_rename(const SourceProgram& program, const Renaming& mapping) {
  std::vector<std::string> lines = program.lines;
  const auto tokens = frontend::tokenize(program.source);
  // Right to left so earlier columns stay valid.
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    if (it->kind != frontend::TokenKind::Identifier || frontend::is_builtin(it->text)) continue;
    const auto m = mapping.find(it->text);
    if (m == mapping.end()) continue;
    auto& line = lines.at(static_cast<std::size_t>(it->line - 1));
    line.replace(static_cast<std::size_t>(it->column - 1), it->text.size(), m->second);
  }
  std::string text;
  for (std::size_t i = 0; i < lines.size(); ++i) text += (i > 0 ? "\n" : "") + lines[i];
  return SourceProgram::from_text(program.id, text);
}

Renaming random_renaming(const SourceProgram& program, std::uint64_t seed) {
  std::set<std::string> functions;
  std::set<std::string> variables;
  const auto ast = frontend::parse_source(program);
  for (const auto& [name, decl] : ast.functions()) functions.insert(name);
  for (const auto& t : frontend::tokenize(program.source)) {
    if (t.kind == frontend::TokenKind::Identifier && !frontend::is_builtin(t.text) && functions.count(t.text) == 0) {
      variables.insert(t.text);
    }
  }
  std::mt19937_64 rng(seed);
  const auto assign = [&](const std::set<std::string>& names, const std::string& prefix, Renaming& out) {
    std::vector<std::size_t> ids(names.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::size_t i = 0;
    for (const auto& n : names) out[n] = prefix + std::to_string(ids[i++]);
  };
  Renaming out;
  assign(variables, "v_", out);
  assign(functions, "f_", out);
  return out;
}

}  // namespace vulcan::corpus
