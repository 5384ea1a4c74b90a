#include "vulcan/nn/loss.hpp"

#include <algorithm>
#include <cmath>

namespace vulcan::nn {

XentResult weighted_xent(const Tensor& logits, const std::vector<int>& labels, const std::array<double, 2>& weights) {
  if (logits.cols() != 2 || logits.rows() != labels.size()) {
    throw ShapeMismatch("xent logits " + shape_string(logits.shape) + " for " + std::to_string(labels.size()) +
                        " labels");
  }
  if (weights[0] <= 0.0 || weights[1] <= 0.0) throw Error(ErrorCategory::Usage, "class weights must be positive");
  XentResult r;
  r.grad = Tensor(logits.shape);
  const std::size_t n = labels.size();
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw Error(ErrorCategory::Data, "label must be 0 or 1");
    const double* z = logits.row(i);
    const double top = std::max(z[0], z[1]);
    const double lse = top + std::log(std::exp(z[0] - top) + std::exp(z[1] - top));
    const double w = weights[static_cast<std::size_t>(y)];
    r.loss += w * (lse - z[y]) * inv_n;
    for (int k = 0; k < 2; ++k) {
      const double p = std::exp(z[k] - lse);
      r.grad.at(i, static_cast<std::size_t>(k)) = w * inv_n * (p - (k == y ? 1.0 : 0.0));
    }
  }
  return r;
}

Var weighted_xent(Graph& g, Var logits, const std::vector<int>& labels, const std::array<double, 2>& weights) {
  XentResult r = weighted_xent(g.value(logits), labels, weights);
  const Var out{static_cast<int>(g.size())};
  return g.push(Tensor({1, 1}, r.loss), [=, grad = std::move(r.grad)](Graph& gr) {
    if (!gr.needs_grad(logits)) return;
    const double gy = gr.grad(out).data[0];
    Tensor& gl = gr.grad(logits);
    for (std::size_t i = 0; i < grad.size(); ++i) gl.data[i] += gy * grad.data[i];
  });
}

double positive_probability(const double* logits) {
  const double top = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - top);
  const double e1 = std::exp(logits[1] - top);
  return e1 / (e0 + e1);
}

}  // namespace vulcan::nn
