#include "vulcan/nn/adagrad.hpp"

#include <cmath>

namespace vulcan::nn {

void adagrad_step(const std::vector<Parameter*>& params, AdagradState& state) {
  for (Parameter* p : params) {
    if (p->trainable) {
      auto it = state.accum.find(p->name);
      if (it == state.accum.end()) it = state.accum.emplace(p->name, Tensor(p->value.shape)).first;
      Tensor& G = it->second;
      if (G.shape != p->value.shape) throw ShapeMismatch("adagrad accumulator for " + p->name);
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        const double gi = p->grad.data[i];
        if (gi == 0.0) continue;
        G.data[i] += gi * gi;
        p->value.data[i] -= state.lr * gi / (std::sqrt(G.data[i]) + state.eps);
      }
    }
    p->grad.fill(0.0);
  }
}

}  // namespace vulcan::nn
