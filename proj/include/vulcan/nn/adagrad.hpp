#pragma once

#include <map>
#include <string>
#include <vector>

#include "vulcan/nn/tensor.hpp"

namespace vulcan::nn {

struct AdagradState {
  double lr = 0.05;
  double eps = 1e-8;
  std::map<std::string, Tensor> accum;  // keyed by parameter name
};

/// G += g²; θ -= lr·g/(√G + eps) for trainable parameters, then zeroes every
/// gradient (frozen ones included).
void adagrad_step(const std::vector<Parameter*>& params, AdagradState& state);

}  // namespace vulcan::nn
