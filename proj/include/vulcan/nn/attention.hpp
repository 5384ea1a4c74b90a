#pragma once

#include <vector>

#include "vulcan/nn/graph.hpp"

namespace vulcan::nn {

/// softmax(H q) for H [len, d] and q of d entries.
std::vector<double> attention_weights(const Tensor& H, const Tensor& query);

/// Σ_t α_t H_t with α = softmax(H q); result is [1, d].
Var dot_attention(Graph& g, Var H, Var query);

}  // namespace vulcan::nn
