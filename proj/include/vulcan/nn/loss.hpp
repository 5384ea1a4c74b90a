#pragma once

#include <array>
#include <vector>

#include "vulcan/nn/graph.hpp"

namespace vulcan::nn {

struct XentResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d logits, [batch, 2]
};

/// (1/batch) Σ_i w[y_i] · −log softmax(logits_i)[y_i].
XentResult weighted_xent(const Tensor& logits, const std::vector<int>& labels, const std::array<double, 2>& weights);

/// Graph form of weighted_xent; the result is [1,1].
Var weighted_xent(Graph& g, Var logits, const std::vector<int>& labels, const std::array<double, 2>& weights);

/// softmax(row)[1] for a two-logit row.
double positive_probability(const double* logits);

}  // namespace vulcan::nn
