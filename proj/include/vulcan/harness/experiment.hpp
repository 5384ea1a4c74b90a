#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vulcan/corpus/types.hpp"
#include "vulcan/frontend/ast.hpp"
#include "vulcan/model/config.hpp"

namespace vulcan::harness {

/// Everything that determines a training run besides the corpus.
struct ExperimentConfig {
  model::ModelConfig model;
  double lr = 0.05;
  double eps = 1e-8;
  int batch_lines = 32;  // whole programs are added until a step holds this many labelled lines
  int max_epochs = 20;
  int patience = 5;  // epochs without a better validation F1 before stopping
  std::string class_weight_rule = "inverse_frequency";  // or "none"
  double subsample_ratio = 10.0;  // negatives kept per positive in train; 0 keeps all
  std::uint64_t seed = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

void validate(const ExperimentConfig& cfg);
void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a usage error.
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

/// Overrides from a config file body: a JSON object or `key=value` lines.
/// Model keys may appear at top level or under "model".
void apply_experiment_config_text(std::string_view text, ExperimentConfig& cfg);

/// Parsed corpus plus its content hash.
struct Dataset {
  corpus::Corpus records;
  std::vector<frontend::Ast> asts;  // parallel to records
  std::string hash;                 // FNV-1a of the canonical JSONL

  std::vector<std::size_t> indices(corpus::Split split) const;
};

Dataset make_dataset(corpus::Corpus records);

}  // namespace vulcan::harness
