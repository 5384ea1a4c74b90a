#include "vulcan/nn/batchnorm.hpp"

#include <cmath>

namespace vulcan::nn {

void update_running_stats(BatchNormState& state, const std::vector<const Tensor*>& parts) {
  const std::size_t f = state.running_mean->value.size();
  std::size_t n = 0;
  std::vector<double> mean(f, 0.0);
  for (const Tensor* t : parts) {
    if (t->cols() != f) throw ShapeMismatch("running statistics over " + std::to_string(t->cols()) + " features");
    for (std::size_t r = 0; r < t->rows(); ++r) {
      for (std::size_t j = 0; j < f; ++j) mean[j] += t->at(r, j);
    }
    n += t->rows();
  }
  if (n < 2) throw BatchTooSmall(n);
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> var(f, 0.0);
  for (const Tensor* t : parts) {
    for (std::size_t r = 0; r < t->rows(); ++r) {
      for (std::size_t j = 0; j < f; ++j) {
        const double c = t->at(r, j) - mean[j];
        var[j] += c * c;
      }
    }
  }
  const double m = state.momentum;
  for (std::size_t j = 0; j < f; ++j) {
    state.running_mean->value.data[j] = (1.0 - m) * state.running_mean->value.data[j] + m * mean[j];
    state.running_var->value.data[j] =
        (1.0 - m) * state.running_var->value.data[j] + m * var[j] / static_cast<double>(n - 1);
  }
}

Var batchnorm(Graph& g, Var x, BatchNormState& state) {
  const Tensor& X = g.value(x);
  const std::size_t n = X.rows();
  const std::size_t f = X.cols();
  if (state.gamma->value.size() != f || state.beta->value.size() != f) {
    throw ShapeMismatch("batch norm over " + std::to_string(f) + " features");
  }
  const Var gamma = g.param(*state.gamma);
  const Var beta = g.param(*state.beta);
  const bool train = state.mode == NormMode::Train;
  if (train && n < 2) throw BatchTooSmall(n);

  std::vector<double> mean(f, 0.0);
  std::vector<double> var(f, 0.0);
  if (train) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < f; ++j) mean[j] += X.at(r, j);
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < f; ++j) {
        const double c = X.at(r, j) - mean[j];
        var[j] += c * c;
      }
    }
    for (double& v : var) v /= static_cast<double>(n);
    if (state.update_running) {
      const double m = state.momentum;
      const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
      for (std::size_t j = 0; j < f; ++j) {
        state.running_mean->value.data[j] = (1.0 - m) * state.running_mean->value.data[j] + m * mean[j];
        state.running_var->value.data[j] = (1.0 - m) * state.running_var->value.data[j] + m * var[j] * unbias;
      }
    }
  } else {
    mean = state.running_mean->value.data;
    var = state.running_var->value.data;
  }

  std::vector<double> inv_std(f);
  for (std::size_t j = 0; j < f; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + state.eps);
  Tensor xhat({n, f});
  Tensor out({n, f});
  const Tensor& G = g.value(gamma);
  const Tensor& B = g.value(beta);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < f; ++j) {
      const double h = (X.at(r, j) - mean[j]) * inv_std[j];
      xhat.at(r, j) = h;
      out.at(r, j) = G.data[j] * h + B.data[j];
    }
  }

  const Var result{static_cast<int>(g.size())};
  return g.push(std::move(out), [=, xhat = std::move(xhat)](Graph& gr) {
    const Tensor gy = gr.grad(result);
    const Tensor& Gv = gr.value(gamma);
    if (gr.needs_grad(gamma)) {
      Tensor& gg = gr.grad(gamma);
      Tensor& gb = gr.grad(beta);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < f; ++j) {
          gg.data[j] += gy.at(r, j) * xhat.at(r, j);
          gb.data[j] += gy.at(r, j);
        }
      }
    }
    if (!gr.needs_grad(x)) return;
    Tensor& gx = gr.grad(x);
    if (!train) {
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < f; ++j) gx.at(r, j) += gy.at(r, j) * Gv.data[j] * inv_std[j];
      }
      return;
    }
    const double nn = static_cast<double>(n);
    for (std::size_t j = 0; j < f; ++j) {
      double sum_d = 0.0;
      double sum_dx = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double dh = gy.at(r, j) * Gv.data[j];
        sum_d += dh;
        sum_dx += dh * xhat.at(r, j);
      }
      for (std::size_t r = 0; r < n; ++r) {
        const double dh = gy.at(r, j) * Gv.data[j];
        gx.at(r, j) += inv_std[j] / nn * (nn * dh - sum_d - xhat.at(r, j) * sum_dx);
      }
    }
  });
}

}  // namespace vulcan::nn
