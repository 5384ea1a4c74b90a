#include "vulcan/nn/lstm.hpp"

#include <cmath>
#include <memory>

#include "vulcan/nn/ops.hpp"

namespace vulcan::nn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Step {
  std::vector<double> xh;      // [x ; h_prev]
  std::vector<double> gates;   // activated i, f, o, g
  std::vector<double> c_prev;
  std::vector<double> tanh_c;
};

std::size_t hidden_of(const Tensor& w, const Tensor& b, std::size_t d_in) {
  if (w.rank() != 2 || w.shape[1] % 4 != 0) throw ShapeMismatch("lstm weight " + shape_string(w.shape));
  const std::size_t h = w.shape[1] / 4;
  if (w.shape[0] != d_in + h) {
    throw ShapeMismatch("lstm weight " + shape_string(w.shape) + " for input width " + std::to_string(d_in));
  }
  if (b.size() != 4 * h) throw ShapeMismatch("lstm bias " + shape_string(b.shape));
  return h;
}

// Fills `st`, writes h and c.
void cell_forward(const double* x, std::size_t d, const double* h_prev, const double* c_prev, const Tensor& w,
                  const Tensor& b, std::size_t h, Step& st, double* h_out, double* c_out) {
  const std::size_t n4 = 4 * h;
  st.xh.assign(x, x + d);
  st.xh.insert(st.xh.end(), h_prev, h_prev + h);
  st.c_prev.assign(c_prev, c_prev + h);
  st.gates.assign(b.data.begin(), b.data.end());
  for (std::size_t k = 0; k < d + h; ++k) {
    const double v = st.xh[k];
    if (v == 0.0) continue;
    const double* wk = w.row(k);
    for (std::size_t j = 0; j < n4; ++j) st.gates[j] += v * wk[j];
  }
  for (std::size_t j = 0; j < 3 * h; ++j) st.gates[j] = sigmoid(st.gates[j]);
  for (std::size_t j = 3 * h; j < n4; ++j) st.gates[j] = std::tanh(st.gates[j]);
  st.tanh_c.resize(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double i = st.gates[j];
    const double f = st.gates[h + j];
    const double o = st.gates[2 * h + j];
    const double gg = st.gates[3 * h + j];
    const double c = f * c_prev[j] + i * gg;
    c_out[j] = c;
    st.tanh_c[j] = std::tanh(c);
    h_out[j] = o * st.tanh_c[j];
  }
}

// dh, dc: gradients w.r.t. this step's outputs. Accumulates into gw/gb
// (if non-null) and writes dx (length d, may be null), dh_prev, dc_prev.
void cell_backward(const Step& st, std::size_t d, std::size_t h, const double* dh, const double* dc,
                   const Tensor& w, Tensor* gw, Tensor* gb, double* dx, double* dh_prev, double* dc_prev) {
  const std::size_t n4 = 4 * h;
  std::vector<double> dz(n4);
  for (std::size_t j = 0; j < h; ++j) {
    const double i = st.gates[j];
    const double f = st.gates[h + j];
    const double o = st.gates[2 * h + j];
    const double gg = st.gates[3 * h + j];
    const double tc = st.tanh_c[j];
    const double dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
    dz[j] = dct * gg * i * (1.0 - i);
    dz[h + j] = dct * st.c_prev[j] * f * (1.0 - f);
    dz[2 * h + j] = dh[j] * tc * o * (1.0 - o);
    dz[3 * h + j] = dct * i * (1.0 - gg * gg);
    dc_prev[j] = dct * f;
  }
  if (gw) {
    for (std::size_t k = 0; k < d + h; ++k) {
      const double v = st.xh[k];
      if (v == 0.0) continue;
      double* gk = gw->row(k);
      for (std::size_t j = 0; j < n4; ++j) gk[j] += v * dz[j];
    }
  }
  if (gb) {
    for (std::size_t j = 0; j < n4; ++j) gb->data[j] += dz[j];
  }
  for (std::size_t k = 0; k < d + h; ++k) {
    const double* wk = w.row(k);
    double s = 0.0;
    for (std::size_t j = 0; j < n4; ++j) s += dz[j] * wk[j];
    if (k < d) {
      if (dx) dx[k] += s;
    } else {
      dh_prev[k - d] = s;
    }
  }
}

}  // namespace

LstmState lstm_cell(Graph& g, Var x, Var h_prev, Var c_prev, const LstmWeights& weights) {
  const Tensor& X = g.value(x);
  const Tensor& H = g.value(h_prev);
  const Tensor& C = g.value(c_prev);
  const std::size_t d = X.size();
  const std::size_t h = hidden_of(g.value(weights.w), g.value(weights.b), d);
  if (H.size() != h || C.size() != h) throw ShapeMismatch("lstm state width");

  auto st = std::make_shared<Step>();
  Tensor out({1, 2 * h});
  cell_forward(X.data.data(), d, H.data.data(), C.data.data(), g.value(weights.w), g.value(weights.b), h, *st,
               out.data.data(), out.data.data() + h);

  const Var joint{static_cast<int>(g.size())};
  const LstmWeights wts = weights;
  g.push(std::move(out), [=](Graph& gr) {
    const Tensor& gy = gr.grad(joint);
    std::vector<double> dx(d, 0.0);
    std::vector<double> dh_prev(h);
    std::vector<double> dc_prev(h);
    Tensor* gw = gr.needs_grad(wts.w) ? &gr.grad(wts.w) : nullptr;
    Tensor* gb = gr.needs_grad(wts.b) ? &gr.grad(wts.b) : nullptr;
    cell_backward(*st, d, h, gy.data.data(), gy.data.data() + h, gr.value(wts.w), gw, gb, dx.data(),
                  dh_prev.data(), dc_prev.data());
    if (gr.needs_grad(x)) {
      Tensor& gx = gr.grad(x);
      for (std::size_t k = 0; k < d; ++k) gx.data[k] += dx[k];
    }
    if (gr.needs_grad(h_prev)) {
      Tensor& gh = gr.grad(h_prev);
      for (std::size_t k = 0; k < h; ++k) gh.data[k] += dh_prev[k];
    }
    if (gr.needs_grad(c_prev)) {
      Tensor& gc = gr.grad(c_prev);
      for (std::size_t k = 0; k < h; ++k) gc.data[k] += dc_prev[k];
    }
  });
  return {slice_cols(g, joint, 0, h), slice_cols(g, joint, h, 2 * h)};
}

Var bilstm(Graph& g, Var seq, const LstmWeights& fwd, const LstmWeights& bwd) {
  const Tensor& S = g.value(seq);
  const std::size_t len = S.rows();
  if (len == 0) throw EmptySequence();
  const std::size_t d = S.cols();
  const std::size_t h = hidden_of(g.value(fwd.w), g.value(fwd.b), d);
  if (hidden_of(g.value(bwd.w), g.value(bwd.b), d) != h) throw ShapeMismatch("bilstm directions differ in width");

  auto steps = std::make_shared<std::vector<Step>>(2 * len);  // [0,len) forward, [len,2len) backward
  Tensor out({len, 2 * h});
  std::vector<double> hs(h, 0.0);
  std::vector<double> cs(h, 0.0);
  std::vector<double> hn(h);
  std::vector<double> cn(h);
  for (std::size_t t = 0; t < len; ++t) {
    cell_forward(S.row(t), d, hs.data(), cs.data(), g.value(fwd.w), g.value(fwd.b), h, (*steps)[t], hn.data(),
                 cn.data());
    hs = hn;
    cs = cn;
    std::copy(hs.begin(), hs.end(), out.row(t));
  }
  std::fill(hs.begin(), hs.end(), 0.0);
  std::fill(cs.begin(), cs.end(), 0.0);
  for (std::size_t t = len; t-- > 0;) {
    cell_forward(S.row(t), d, hs.data(), cs.data(), g.value(bwd.w), g.value(bwd.b), h, (*steps)[len + t],
                 hn.data(), cn.data());
    hs = hn;
    cs = cn;
    std::copy(hs.begin(), hs.end(), out.row(t) + h);
  }

  const Var result{static_cast<int>(g.size())};
  return g.push(std::move(out), [=](Graph& gr) {
    const Tensor& gy = gr.grad(result);
    const bool want_x = gr.needs_grad(seq);
    Tensor* gx = want_x ? &gr.grad(seq) : nullptr;
    std::vector<double> dh(h);
    std::vector<double> dc(h);
    std::vector<double> dh_prev(h);
    std::vector<double> dc_prev(h);

    auto run = [&](const LstmWeights& wts, bool forward_dir) {
      Tensor* gw = gr.needs_grad(wts.w) ? &gr.grad(wts.w) : nullptr;
      Tensor* gb = gr.needs_grad(wts.b) ? &gr.grad(wts.b) : nullptr;
      std::fill(dh.begin(), dh.end(), 0.0);
      std::fill(dc.begin(), dc.end(), 0.0);
      for (std::size_t n = 0; n < len; ++n) {
        // Visit steps in reverse processing order.
        const std::size_t t = forward_dir ? len - 1 - n : n;
        const double* gout = gy.row(t) + (forward_dir ? 0 : h);
        for (std::size_t j = 0; j < h; ++j) dh[j] += gout[j];
        const Step& st = (*steps)[forward_dir ? t : len + t];
        cell_backward(st, d, h, dh.data(), dc.data(), gr.value(wts.w), gw, gb, gx ? gx->row(t) : nullptr,
                      dh_prev.data(), dc_prev.data());
        dh.swap(dh_prev);
        dc.swap(dc_prev);
      }
    };
    run(fwd, true);
    run(bwd, false);
  });
}

}  // namespace vulcan::nn
