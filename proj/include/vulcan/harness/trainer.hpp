#pragma once

#include <array>
#include <functional>
#include <vector>

#include "vulcan/harness/experiment.hpp"
#include "vulcan/harness/metrics.hpp"
#include "vulcan/model/model.hpp"

namespace vulcan::harness {

class DegenerateTraining : public Error {
 public:
  explicit DegenerateTraining(const std::string& what) : Error(ErrorCategory::Data, "degenerate training: " + what) {}
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean over steps
  Metrics val;
};

struct TrainResult {
  model::Model model;  // parameters of the best validation epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
  std::array<double, 2> class_weights{1.0, 1.0};
  std::size_t train_positive = 0;
  std::size_t train_negative = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Subsamples train negatives, weights classes, then runs Adagrad over
/// shuffled program groups, keeping the parameters with the best validation
/// F1 (undefined counts as 0) and stopping after `patience` epochs without
/// improvement. Vocabularies come from the train split.
TrainResult train(const Dataset& data, const ExperimentConfig& cfg, const EpochCallback& on_epoch = {});

struct LineScore {
  std::size_t record = 0;
  int line = 0;
  int label = 0;
  double probability = 0.0;
};

/// Inference over every representable labelled line of a split.
std::vector<LineScore> score_split(model::Model& m, const Dataset& data, corpus::Split split);

Metrics evaluate(model::Model& m, const Dataset& data, corpus::Split split);

}  // namespace vulcan::harness
