#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulcan/harness/experiment.hpp"
#include "vulcan/harness/metrics.hpp"

namespace vulcan::harness {

enum class FeatureMode { LineTokens, AstNodes, AstPathStrings };

std::string_view to_string(FeatureMode mode);
/// Accepts the enum names and the short forms tok / nodes / paths.
std::optional<FeatureMode> feature_mode_from_string(std::string_view name);

using FeatureCounts = std::map<std::string, int>;

/// LineTokens: lexical tokens of the line text. AstNodes: node kinds on the
/// context paths of the line's tokens. AstPathStrings: each context path
/// rendered as one string.
FeatureCounts line_features(const frontend::Ast& ast, const frontend::SourceProgram& program, int line,
                            FeatureMode mode);

struct BowConfig {
  double lr = 0.5;
  int iterations = 2000;  // full-batch gradient steps
  double subsample_ratio = 10.0;
  std::string class_weight_rule = "inverse_frequency";
  std::uint64_t seed = 1;
};

inline constexpr std::string_view kUnknownFeature = "<unk>";

/// Logistic regression over count features; the UNK column is the last
/// vocabulary entry and the bias the last weight.
struct BowModel {
  FeatureMode mode = FeatureMode::LineTokens;
  std::map<std::string, int> vocab;
  std::vector<double> weights;  // vocab.size() + 1

  double probability(const FeatureCounts& features) const;
};

/// Gradient descent on the weighted cross-entropy over the (subsampled)
/// train split, class weights as for the neural model.
BowModel train_bow(const Dataset& data, FeatureMode mode, const BowConfig& cfg);

Metrics evaluate_bow(const BowModel& m, const Dataset& data, corpus::Split split);

}  // namespace vulcan::harness
