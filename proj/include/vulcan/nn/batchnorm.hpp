#pragma once

#include "vulcan/nn/graph.hpp"

namespace vulcan::nn {

class BatchTooSmall : public Error {
 public:
  explicit BatchTooSmall(std::size_t batch)
      : Error(ErrorCategory::Internal, "batch norm in training mode needs 2+ rows, got " + std::to_string(batch)) {}
};

enum class NormMode { Train, Eval };

/// gamma and beta are trained; the running statistics are parameters too
/// (so they are checkpointed) but are only written by the forward pass.
struct BatchNormState {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  Parameter* running_mean = nullptr;
  Parameter* running_var = nullptr;
  double momentum = 0.1;
  double eps = 1e-5;
  NormMode mode = NormMode::Train;
  /// Train mode only: fold batch statistics into the running ones.
  bool update_running = true;
};

/// Train: normalise by the batch mean and biased variance; the running
/// variance is updated with the unbiased estimate. Eval: running statistics.
Var batchnorm(Graph& g, Var x, BatchNormState& state);

/// Folds the statistics of all rows of `parts` (taken together) into the
/// running ones, as a training-mode call over their concatenation would.
void update_running_stats(BatchNormState& state, const std::vector<const Tensor*>& parts);

}  // namespace vulcan::nn
