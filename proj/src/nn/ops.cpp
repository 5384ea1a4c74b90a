#include "vulcan/nn/ops.hpp"

#include <algorithm>
#include <cmath>

namespace vulcan::nn {

namespace {

double apply(Activation act, double z) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return z;
}

// Derivative expressed through the activation's output.
double derivative(Activation act, double y) {
  switch (act) {
    case Activation::Identity: return 1.0;
    case Activation::ReLU: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - y * y;
    case Activation::Sigmoid: return y * (1.0 - y);
  }
  return 1.0;
}

Var next_var(const Graph& g) { return Var{static_cast<int>(g.size())}; }

void check_bias(const Tensor& b, std::size_t out) {
  if (b.size() != out) throw ShapeMismatch("bias " + shape_string(b.shape) + " for " + std::to_string(out) + " outputs");
}

void finish_affine(Tensor& y, const Tensor* b, Activation act) {
  const std::size_t n = y.rows();
  const std::size_t m = y.cols();
  for (std::size_t r = 0; r < n; ++r) {
    double* yr = y.row(r);
    for (std::size_t j = 0; j < m; ++j) yr[j] = apply(act, b ? yr[j] + b->data[j] : yr[j]);
  }
}

// dL/dz for an affine node with output `out`.
Tensor pre_activation_grad(Graph& g, Var out, Activation act) {
  Tensor dz = g.grad(out);
  if (act == Activation::Identity) return dz;
  const Tensor& y = g.value(out);
  for (std::size_t i = 0; i < dz.size(); ++i) dz.data[i] *= derivative(act, y.data[i]);
  return dz;
}

void accumulate_bias(Graph& g, std::optional<Var> b, const Tensor& dz) {
  if (!b || !g.needs_grad(*b)) return;
  Tensor& gb = g.grad(*b);
  const std::size_t m = dz.cols();
  for (std::size_t r = 0; r < dz.rows(); ++r) {
    const double* d = dz.row(r);
    for (std::size_t j = 0; j < m; ++j) gb.data[j] += d[j];
  }
}

}  // namespace

Var dense(Graph& g, Var x, Var w, std::optional<Var> b, Activation act) {
  const Tensor& X = g.value(x);
  const Tensor& W = g.value(w);
  if (W.rank() != 2 || X.cols() != W.shape[0]) {
    throw ShapeMismatch("dense " + shape_string(X.shape) + " x " + shape_string(W.shape));
  }
  const std::size_t n = X.rows();
  const std::size_t in = W.shape[0];
  const std::size_t m = W.shape[1];
  if (b) check_bias(g.value(*b), m);

  Tensor Y({n, m});
  for (std::size_t r = 0; r < n; ++r) {
    double* yr = Y.row(r);
    const double* xr = X.row(r);
    for (std::size_t k = 0; k < in; ++k) {
      const double xv = xr[k];
      if (xv == 0.0) continue;
      const double* wk = W.row(k);
      for (std::size_t j = 0; j < m; ++j) yr[j] += xv * wk[j];
    }
  }
  finish_affine(Y, b ? &g.value(*b) : nullptr, act);

  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    const Tensor dz = pre_activation_grad(gr, out, act);
    const Tensor& Xv = gr.value(x);
    const Tensor& Wv = gr.value(w);
    if (gr.needs_grad(w)) {
      Tensor& gw = gr.grad(w);
      for (std::size_t r = 0; r < n; ++r) {
        const double* xr = Xv.row(r);
        const double* d = dz.row(r);
        for (std::size_t k = 0; k < in; ++k) {
          const double xv = xr[k];
          if (xv == 0.0) continue;
          double* gk = gw.row(k);
          for (std::size_t j = 0; j < m; ++j) gk[j] += xv * d[j];
        }
      }
    }
    accumulate_bias(gr, b, dz);
    if (gr.needs_grad(x)) {
      Tensor& gx = gr.grad(x);
      for (std::size_t r = 0; r < n; ++r) {
        const double* d = dz.row(r);
        double* gxr = gx.row(r);
        for (std::size_t k = 0; k < in; ++k) {
          const double* wk = Wv.row(k);
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += d[j] * wk[j];
          gxr[k] += s;
        }
      }
    }
  });
}

Var block_dense(Graph& g, std::size_t batch, const std::vector<SlotInput>& inputs, Var w, std::optional<Var> b,
                Activation act) {
  const Tensor& W = g.value(w);
  if (W.rank() != 2) throw ShapeMismatch("block_dense weight " + shape_string(W.shape));
  const std::size_t m = W.shape[1];
  if (b) check_bias(g.value(*b), m);

  std::vector<SlotInput> order = inputs;
  std::stable_sort(order.begin(), order.end(), [](const SlotInput& a, const SlotInput& c) {
    return a.row != c.row ? a.row < c.row : a.offset < c.offset;
  });
  for (const auto& s : order) {
    const Tensor& v = g.value(s.v);
    if (s.row >= batch || s.v_row >= v.rows() || s.offset + v.cols() > W.shape[0]) {
      throw ShapeMismatch("block_dense slot at offset " + std::to_string(s.offset) + " of width " +
                          std::to_string(v.cols()) + " into " + shape_string(W.shape));
    }
  }

  Tensor Y({batch, m});
  for (const auto& s : order) {
    const Tensor& v = g.value(s.v);
    const double* xr = v.row(s.v_row);
    double* yr = Y.row(s.row);
    for (std::size_t k = 0; k < v.cols(); ++k) {
      const double xv = xr[k];
      if (xv == 0.0) continue;
      const double* wk = W.row(s.offset + k);
      for (std::size_t j = 0; j < m; ++j) yr[j] += xv * wk[j];
    }
  }
  finish_affine(Y, b ? &g.value(*b) : nullptr, act);

  const Var out = next_var(g);
  return g.push(std::move(Y), [=, order = std::move(order)](Graph& gr) {
    const Tensor dz = pre_activation_grad(gr, out, act);
    const Tensor& Wv = gr.value(w);
    const bool want_w = gr.needs_grad(w);
    for (const auto& s : order) {
      const Tensor& v = gr.value(s.v);
      const double* xr = v.row(s.v_row);
      const double* d = dz.row(s.row);
      const std::size_t width = v.cols();
      if (want_w) {
        Tensor& gw = gr.grad(w);
        for (std::size_t k = 0; k < width; ++k) {
          const double xv = xr[k];
          if (xv == 0.0) continue;
          double* gk = gw.row(s.offset + k);
          for (std::size_t j = 0; j < m; ++j) gk[j] += xv * d[j];
        }
      }
      if (gr.needs_grad(s.v)) {
        double* gv = gr.grad(s.v).row(s.v_row);
        for (std::size_t k = 0; k < width; ++k) {
          const double* wk = Wv.row(s.offset + k);
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += d[j] * wk[j];
          gv[k] += acc;
        }
      }
    }
    accumulate_bias(gr, b, dz);
  });
}

Var activate(Graph& g, Var x, Activation act) {
  Tensor Y = g.value(x);
  for (double& v : Y.data) v = apply(act, v);
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    if (!gr.needs_grad(x)) return;
    const Tensor dz = pre_activation_grad(gr, out, act);
    Tensor& gx = gr.grad(x);
    for (std::size_t i = 0; i < dz.size(); ++i) gx.data[i] += dz.data[i];
  });
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.shape != B.shape) throw ShapeMismatch("add " + shape_string(A.shape) + " + " + shape_string(B.shape));
  Tensor Y = A;
  for (std::size_t i = 0; i < Y.size(); ++i) Y.data[i] += B.data[i];
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    const Tensor gy = gr.grad(out);
    for (Var v : {a, b}) {
      if (!gr.needs_grad(v)) continue;
      Tensor& gv = gr.grad(v);
      for (std::size_t i = 0; i < gy.size(); ++i) gv.data[i] += gy.data[i];
    }
  });
}

Var mul(Graph& g, Var a, Var b) {
  const Tensor& A = g.value(a);
  const Tensor& B = g.value(b);
  if (A.shape != B.shape) throw ShapeMismatch("mul " + shape_string(A.shape) + " * " + shape_string(B.shape));
  Tensor Y = A;
  for (std::size_t i = 0; i < Y.size(); ++i) Y.data[i] *= B.data[i];
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    const Tensor gy = gr.grad(out);
    const Tensor av = gr.value(a);
    const Tensor bv = gr.value(b);
    if (gr.needs_grad(a)) {
      Tensor& ga = gr.grad(a);
      for (std::size_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i] * bv.data[i];
    }
    if (gr.needs_grad(b)) {
      Tensor& gb = gr.grad(b);
      for (std::size_t i = 0; i < gy.size(); ++i) gb.data[i] += gy.data[i] * av.data[i];
    }
  });
}

Var sum(Graph& g, Var x) {
  double s = 0.0;
  for (double v : g.value(x).data) s += v;
  const Var out = next_var(g);
  return g.push(Tensor({1, 1}, s), [=](Graph& gr) {
    if (!gr.needs_grad(x)) return;
    const double gy = gr.grad(out).data[0];
    for (double& v : gr.grad(x).data) v += gy;
  });
}

Var row(Graph& g, Var x, std::size_t i) {
  const Tensor& X = g.value(x);
  if (i >= X.rows()) throw ShapeMismatch("row " + std::to_string(i) + " of " + shape_string(X.shape));
  const std::size_t c = X.cols();
  Tensor Y({1, c});
  std::copy(X.row(i), X.row(i) + c, Y.data.begin());
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    if (!gr.needs_grad(x)) return;
    const Tensor& gy = gr.grad(out);
    double* gx = gr.grad(x).row(i);
    for (std::size_t j = 0; j < c; ++j) gx[j] += gy.data[j];
  });
}

Var slice_cols(Graph& g, Var x, std::size_t begin, std::size_t end) {
  const Tensor& X = g.value(x);
  if (begin > end || end > X.cols()) throw ShapeMismatch("slice of " + shape_string(X.shape));
  const std::size_t n = X.rows();
  const std::size_t w = end - begin;
  Tensor Y({n, w});
  for (std::size_t r = 0; r < n; ++r) std::copy(X.row(r) + begin, X.row(r) + end, Y.row(r));
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    if (!gr.needs_grad(x)) return;
    const Tensor gy = gr.grad(out);
    Tensor& gx = gr.grad(x);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < w; ++j) gx.row(r)[begin + j] += gy.row(r)[j];
    }
  });
}

Var concat_cols(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat of nothing");
  const std::size_t n = g.value(parts[0]).rows();
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (Var p : parts) {
    if (g.value(p).rows() != n) throw ShapeMismatch("concat with unequal row counts");
    offsets.push_back(total);
    total += g.value(p).cols();
  }
  Tensor Y({n, total});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& P = g.value(parts[i]);
    for (std::size_t r = 0; r < n; ++r) std::copy(P.row(r), P.row(r) + P.cols(), Y.row(r) + offsets[i]);
  }
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    const Tensor gy = gr.grad(out);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (!gr.needs_grad(parts[i])) continue;
      Tensor& gp = gr.grad(parts[i]);
      const std::size_t c = gp.cols();
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < c; ++j) gp.row(r)[j] += gy.row(r)[offsets[i] + j];
      }
    }
  });
}

Var stack_rows(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeMismatch("stack of nothing");
  const std::size_t c = g.value(parts[0]).cols();
  std::vector<std::size_t> starts;
  std::size_t total = 0;
  for (Var p : parts) {
    if (g.value(p).cols() != c) throw ShapeMismatch("stack with unequal column counts");
    starts.push_back(total);
    total += g.value(p).rows();
  }
  Tensor Y({total, c});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& P = g.value(parts[i]);
    std::copy(P.data.begin(), P.data.end(), Y.row(starts[i]));
  }
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    const Tensor gy = gr.grad(out);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (!gr.needs_grad(parts[i])) continue;
      Tensor& gp = gr.grad(parts[i]);
      const double* src = gy.row(starts[i]);
      for (std::size_t k = 0; k < gp.size(); ++k) gp.data[k] += src[k];
    }
  });
}

Var gather_rows(Graph& g, Var table, const std::vector<int>& indices) {
  const Tensor& T = g.value(table);
  const std::size_t c = T.cols();
  Tensor Y({indices.size(), c});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || static_cast<std::size_t>(idx) >= T.rows()) {
      throw ShapeMismatch("gather index " + std::to_string(idx) + " into " + shape_string(T.shape));
    }
    std::copy(T.row(static_cast<std::size_t>(idx)), T.row(static_cast<std::size_t>(idx)) + c, Y.row(i));
  }
  const Var out = next_var(g);
  return g.push(std::move(Y), [=](Graph& gr) {
    if (!gr.needs_grad(table)) return;
    const Tensor gy = gr.grad(out);
    Tensor& gt = gr.grad(table);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      double* dst = gt.row(static_cast<std::size_t>(indices[i]));
      for (std::size_t j = 0; j < c; ++j) dst[j] += gy.row(i)[j];
    }
  });
}

}  // namespace vulcan::nn
