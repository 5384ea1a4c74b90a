#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vulcan/deps/dependence.hpp"

namespace vulcan::deps {

/// Training-time vocabularies. Indices are dense from 0 and UNK is always
/// the last index of each table.
struct Vocab {
  std::map<std::string, int> operator_vocab;
  std::map<std::string, int> builtin_vocab;
  std::map<std::pair<NodeKind, Direction>, int> node_kind_vocab;

  int operator_unk() const { return static_cast<int>(operator_vocab.size()); }
  int builtin_unk() const { return static_cast<int>(builtin_vocab.size()); }
  int node_kind_unk() const { return static_cast<int>(node_kind_vocab.size()); }

  // Table sizes including UNK.
  int operator_size() const { return operator_unk() + 1; }
  int builtin_size() const { return builtin_unk() + 1; }
  int node_kind_size() const { return node_kind_unk() + 1; }

  int operator_index(const std::string& op) const;
  int builtin_index(const std::string& name) const;
  int node_kind_index(const PathStep& step) const;

  /// Row of the joint operator/builtin one-hot space (operators first).
  int define_index(const TokenOccurrence& occ) const;
  int define_size() const { return operator_size() + builtin_size(); }

  friend bool operator==(const Vocab&, const Vocab&) = default;
};

void to_json(nlohmann::json& j, const Vocab& v);
void from_json(const nlohmann::json& j, Vocab& v);

/// Vocabularies over every statement line of the given programs.
Vocab build_vocabs(const std::vector<const Ast*>& programs,
                   EndpointPolicy policy = EndpointPolicy::MostRecentDefinition);

struct EncodedPath {
  std::vector<int> indices;
  bool truncated = false;
  friend bool operator==(const EncodedPath&, const EncodedPath&) = default;
};

/// Paths longer than 32 steps keep their first 16 and last 16 steps.
EncodedPath encode_path(const AstPath& path, const Vocab& vocab);

}  // namespace vulcan::deps
