#include "vulcan/nn/attention.hpp"

#include <algorithm>
#include <cmath>

namespace vulcan::nn {

std::vector<double> attention_weights(const Tensor& H, const Tensor& query) {
  const std::size_t len = H.rows();
  const std::size_t d = H.cols();
  if (len == 0) throw ShapeMismatch("attention over an empty sequence");
  if (query.size() != d) throw ShapeMismatch("attention query " + shape_string(query.shape) + " vs " + shape_string(H.shape));
  std::vector<double> s(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    const double* ht = H.row(t);
    for (std::size_t j = 0; j < d; ++j) s[t] += ht[j] * query.data[j];
  }
  const double top = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double& v : s) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : s) v /= z;
  return s;
}

Var dot_attention(Graph& g, Var H, Var query) {
  const Tensor& Hv = g.value(H);
  const std::vector<double> alpha = attention_weights(Hv, g.value(query));
  const std::size_t len = Hv.rows();
  const std::size_t d = Hv.cols();
  Tensor out({1, d});
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < d; ++j) out.data[j] += alpha[t] * Hv.at(t, j);
  }
  const Var result{static_cast<int>(g.size())};
  return g.push(std::move(out), [=](Graph& gr) {
    const Tensor gy = gr.grad(result);
    const Tensor& Hx = gr.value(H);
    const Tensor& q = gr.value(query);
    std::vector<double> dalpha(len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t j = 0; j < d; ++j) dalpha[t] += gy.data[j] * Hx.at(t, j);
    }
    double mean = 0.0;
    for (std::size_t t = 0; t < len; ++t) mean += alpha[t] * dalpha[t];
    std::vector<double> ds(len);
    for (std::size_t t = 0; t < len; ++t) ds[t] = alpha[t] * (dalpha[t] - mean);
    if (gr.needs_grad(H)) {
      Tensor& gH = gr.grad(H);
      for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t j = 0; j < d; ++j) gH.at(t, j) += alpha[t] * gy.data[j] + ds[t] * q.data[j];
      }
    }
    if (gr.needs_grad(query)) {
      Tensor& gq = gr.grad(query);
      for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t j = 0; j < d; ++j) gq.data[j] += ds[t] * Hx.at(t, j);
      }
    }
  });
}

}  // namespace vulcan::nn
