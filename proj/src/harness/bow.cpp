#include "vulcan/harness/bow.hpp"

#include <cmath>

#include "vulcan/corpus/generator.hpp"
#include "vulcan/deps/dependence.hpp"
#include "vulcan/frontend/token.hpp"
#include "vulcan/harness/trainer.hpp"
#include "vulcan/seeds.hpp"

namespace vulcan::harness {

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::LineTokens: return "LineTokens";
    case FeatureMode::AstNodes: return "AstNodes";
    case FeatureMode::AstPathStrings: return "AstPathStrings";
  }
  return "?";
}

std::optional<FeatureMode> feature_mode_from_string(std::string_view name) {
  if (name == "LineTokens" || name == "tok") return FeatureMode::LineTokens;
  if (name == "AstNodes" || name == "nodes") return FeatureMode::AstNodes;
  if (name == "AstPathStrings" || name == "paths") return FeatureMode::AstPathStrings;
  return std::nullopt;
}

FeatureCounts line_features(const frontend::Ast& ast, const frontend::SourceProgram& program, int line,
                            FeatureMode mode) {
  FeatureCounts out;
  if (mode == FeatureMode::LineTokens) {
    for (const auto& tok : frontend::tokenize(program.lines.at(static_cast<std::size_t>(line - 1)))) ++out[tok.text];
    return out;
  }
  for (const auto& tok : deps::line_tokens(ast, line)) {
    const auto res = deps::get_path(tok, line, ast);
    if (res.kind != deps::PathResult::Kind::Path) continue;
    if (mode == FeatureMode::AstPathStrings) {
      ++out[deps::render_path(res.path)];
    } else {
      for (const auto& step : res.path.steps) ++out[std::string(frontend::to_string(step.kind))];
    }
  }
  return out;
}

double BowModel::probability(const FeatureCounts& features) const {
  const int unk = vocab.at(std::string(kUnknownFeature));
  double z = weights.back();
  for (const auto& [name, count] : features) {
    const auto it = vocab.find(name);
    z += weights[static_cast<std::size_t>(it == vocab.end() ? unk : it->second)] * count;
  }
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {

struct Sample {
  std::vector<std::pair<int, int>> features;  // (column, count)
  int label = 0;
};

}  // namespace

BowModel train_bow(const Dataset& data, FeatureMode mode, const BowConfig& cfg) {
  const auto train_idx = data.indices(corpus::Split::Train);
  corpus::Corpus train;
  for (std::size_t i : train_idx) train.push_back(data.records[i]);
  if (cfg.subsample_ratio > 0.0) {
    train = corpus::subsample_negatives(train, cfg.subsample_ratio, sub_seed(cfg.seed, "subsample"));
  }

  BowModel m;
  m.mode = mode;
  std::vector<std::pair<FeatureCounts, int>> raw;
  for (std::size_t k = 0; k < train.size(); ++k) {
    const auto& ast = data.asts[train_idx[k]];
    for (const auto& l : train[k].labels) raw.emplace_back(line_features(ast, train[k].program, l.line, mode), l.label);
  }
  for (const auto& [features, label] : raw) {
    for (const auto& f : features) m.vocab.emplace(f.first, 0);
  }
  int next = 0;
  for (auto& [name, index] : m.vocab) index = next++;
  m.vocab.emplace(std::string(kUnknownFeature), next);
  m.weights.assign(m.vocab.size() + 1, 0.0);

  std::size_t pos = 0;
  std::vector<Sample> samples;
  for (const auto& [features, label] : raw) {
    Sample s;
    for (const auto& [name, count] : features) s.features.emplace_back(m.vocab.at(name), count);
    s.label = label;
    pos += static_cast<std::size_t>(label);
    samples.push_back(std::move(s));
  }
  const std::size_t neg = samples.size() - pos;
  if (pos == 0 || neg == 0) throw DegenerateTraining("train split has a single class");
  const double w_pos =
      cfg.class_weight_rule == "none" ? 1.0 : static_cast<double>(neg) / static_cast<double>(pos);

  const std::size_t bias = m.weights.size() - 1;
  std::vector<double> grad(m.weights.size());
  for (int it = 0; it < cfg.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& s : samples) {
      double z = m.weights[bias];
      for (const auto& [col, count] : s.features) z += m.weights[static_cast<std::size_t>(col)] * count;
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double dz = (s.label == 1 ? w_pos : 1.0) * (p - s.label);
      for (const auto& [col, count] : s.features) grad[static_cast<std::size_t>(col)] += dz * count;
      grad[bias] += dz;
    }
    const double scale = cfg.lr / static_cast<double>(samples.size());
    for (std::size_t j = 0; j < grad.size(); ++j) m.weights[j] -= scale * grad[j];
  }
  return m;
}

Metrics evaluate_bow(const BowModel& m, const Dataset& data, corpus::Split split) {
  std::vector<double> probs;
  std::vector<int> labels;
  for (std::size_t i : data.indices(split)) {
    for (const auto& l : data.records[i].labels) {
      probs.push_back(m.probability(line_features(data.asts[i], data.records[i].program, l.line, m.mode)));
      labels.push_back(l.label);
    }
  }
  return metrics_from_scores(probs, labels);
}

}  // namespace vulcan::harness
