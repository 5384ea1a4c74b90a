#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "vulcan/io.hpp"
#include "vulcan/nn/adagrad.hpp"
#include "vulcan/nn/attention.hpp"
#include "vulcan/nn/batchnorm.hpp"
#include "vulcan/nn/checkpoint.hpp"
#include "vulcan/nn/gradcheck.hpp"
#include "vulcan/nn/loss.hpp"
#include "vulcan/nn/lstm.hpp"
#include "vulcan/nn/ops.hpp"

using namespace vulcan::nn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.data) v = u(rng);
  return t;
}

Tensor identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

// Fixed random weighting so that sums of normalised outputs are not constant.
Var weighted_sum(Graph& g, Var x, const Tensor& weights) { return sum(g, mul(g, x, g.constant(weights))); }

}  // namespace

TEST_CASE("dense identity and relu") {
  ParameterStore ps;
  auto& w = ps.add("w", identity(2));
  auto& b = ps.add("b", Tensor({2}));
  Graph g;
  const Var y = dense(g, g.constant(Tensor::from_rows({{1, 2}})), g.param(w), g.param(b), Activation::Identity);
  CHECK(g.value(y).data == std::vector<double>{1, 2});
  const Var r = dense(g, g.constant(Tensor::from_rows({{-1, 2}})), g.param(w), g.param(b), Activation::ReLU);
  CHECK(g.value(r).data == std::vector<double>{0, 2});
}

TEST_CASE("dense gradients match finite differences") {
  std::mt19937_64 rng(3);
  for (Activation act : {Activation::Identity, Activation::Tanh, Activation::Sigmoid}) {
    ParameterStore ps;
    auto& x = ps.add("x", random_tensor({3, 4}, rng));
    auto& w = ps.add("w", random_tensor({4, 5}, rng));
    auto& b = ps.add("b", random_tensor({5}, rng));
    const auto report = finite_diff_check(
        [&](Graph& g) { return sum(g, dense(g, g.param(x), g.param(w), g.param(b), act)); }, ps.all());
    CHECK(report.max_rel_error < 1e-6);
    CHECK(report.coords_checked == 12 + 20 + 5);
  }
}

TEST_CASE("block_dense equals dense on the zero-padded input, bitwise") {
  std::mt19937_64 rng(5);
  ParameterStore ps;
  auto& w = ps.add("w", random_tensor({12, 6}, rng));
  auto& b = ps.add("b", random_tensor({6}, rng));
  auto& s0 = ps.add("s0", random_tensor({1, 4}, rng));
  auto& s1 = ps.add("s1", random_tensor({2, 4}, rng));

  auto run_dense = [&](Graph& g) {
    // rows: [s0 | 0 | s1[1]] and [0 | s1[0] | 0]
    const Var zero = g.constant(Tensor({1, 4}));
    const Var r0 = concat_cols(g, {g.param(s0), zero, row(g, g.param(s1), 1)});
    const Var r1 = concat_cols(g, {zero, row(g, g.param(s1), 0), zero});
    return dense(g, stack_rows(g, {r0, r1}), g.param(w), g.param(b), Activation::Tanh);
  };
  auto run_block = [&](Graph& g) {
    std::vector<SlotInput> in = {{0, 8, g.param(s1), 1}, {0, 0, g.param(s0), 0}, {1, 4, g.param(s1), 0}};
    return block_dense(g, 2, in, g.param(w), g.param(b), Activation::Tanh);
  };

  Graph gd;
  const Var yd = run_dense(gd);
  Graph gb;
  const Var yb = run_block(gb);
  CHECK(gd.value(yd) == gb.value(yb));

  Tensor weights = random_tensor({2, 6}, rng);
  ps.zero_grads();
  {
    Graph g;
    g.backward(weighted_sum(g, run_dense(g), weights));
  }
  std::vector<Tensor> dense_grads;
  for (auto* p : ps.all()) dense_grads.push_back(p->grad);
  ps.zero_grads();
  {
    Graph g;
    g.backward(weighted_sum(g, run_block(g), weights));
  }
  const auto all = ps.all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t k = 0; k < all[i]->grad.size(); ++k) {
      CHECK(all[i]->grad.data[k] == doctest::Approx(dense_grads[i].data[k]).epsilon(1e-12));
    }
  }
  const auto report =
      finite_diff_check([&](Graph& g) { return weighted_sum(g, run_block(g), weights); }, ps.all());
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("lstm cell with zero weights") {
  ParameterStore ps;
  auto& w = ps.add("w", Tensor({3 + 2, 8}));
  auto& b = ps.add("b", Tensor({8}));
  Graph g;
  const LstmState s = lstm_cell(g, g.constant(Tensor::from_rows({{0.3, -1, 2}})), g.constant(Tensor({1, 2})),
                                g.constant(Tensor({1, 2})), {g.param(w), g.param(b)});
  CHECK(g.value(s.c).data == std::vector<double>{0, 0});
  CHECK(g.value(s.h).data == std::vector<double>{0, 0});
}

TEST_CASE("lstm cell gates computed from their definitions") {
  std::mt19937_64 rng(17);
  const std::size_t d = 2;
  const std::size_t h = 2;
  ParameterStore ps;
  auto& w = ps.add("w", random_tensor({d + h, 4 * h}, rng));
  auto& b = ps.add("b", random_tensor({4 * h}, rng));
  const Tensor x = random_tensor({1, d}, rng);
  const Tensor hp = random_tensor({1, h}, rng);
  const Tensor cp = random_tensor({1, h}, rng);
  Graph g;
  const LstmState s = lstm_cell(g, g.constant(x), g.constant(hp), g.constant(cp), {g.param(w), g.param(b)});
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  for (std::size_t j = 0; j < h; ++j) {
    double z[4];
    for (std::size_t gate = 0; gate < 4; ++gate) {
      const std::size_t col = gate * h + j;
      z[gate] = b.value.data[col];
      for (std::size_t k = 0; k < d; ++k) z[gate] += x.data[k] * w.value.at(k, col);
      for (std::size_t k = 0; k < h; ++k) z[gate] += hp.data[k] * w.value.at(d + k, col);
    }
    const double c = sig(z[1]) * cp.data[j] + sig(z[0]) * std::tanh(z[3]);
    CHECK(g.value(s.c).data[j] == doctest::Approx(c).epsilon(1e-14));
    CHECK(g.value(s.h).data[j] == doctest::Approx(sig(z[2]) * std::tanh(c)).epsilon(1e-14));
  }
}

TEST_CASE("lstm cell pure carry") {
  std::mt19937_64 rng(7);
  const std::size_t h = 3;
  ParameterStore ps;
  auto& w = ps.add("w", Tensor({2 + h, 4 * h}));
  Tensor bias({4 * h});
  for (std::size_t j = 0; j < h; ++j) {
    bias.data[j] = -1e3;     // input gate closed
    bias.data[h + j] = 1e3;  // forget gate open
  }
  auto& b = ps.add("b", bias);
  const Tensor c_prev = random_tensor({1, h}, rng);
  Graph g;
  const LstmState s = lstm_cell(g, g.constant(random_tensor({1, 2}, rng)), g.constant(random_tensor({1, h}, rng)),
                                g.constant(c_prev), {g.param(w), g.param(b)});
  CHECK(g.value(s.c).data == c_prev.data);
}

TEST_CASE("lstm cell gradients over three unrolled steps") {
  std::mt19937_64 rng(11);
  const std::size_t d = 3;
  const std::size_t h = 4;
  ParameterStore ps;
  auto& w = ps.add("w", random_tensor({d + h, 4 * h}, rng, 0.5));
  auto& b = ps.add("b", random_tensor({4 * h}, rng, 0.5));
  auto& xs = ps.add("xs", random_tensor({3, d}, rng));
  const Tensor weights = random_tensor({1, h}, rng);
  const auto report = finite_diff_check(
      [&](Graph& g) {
        Var hs = g.constant(Tensor({1, h}));
        Var cs = g.constant(Tensor({1, h}));
        for (std::size_t t = 0; t < 3; ++t) {
          const LstmState s = lstm_cell(g, row(g, g.param(xs), t), hs, cs, {g.param(w), g.param(b)});
          hs = s.h;
          cs = s.c;
        }
        return add(g, weighted_sum(g, hs, weights), sum(g, cs));
      },
      ps.all());
  CHECK(report.max_rel_error < 1e-5);
}

TEST_CASE("bilstm of one element is the two cells side by side") {
  std::mt19937_64 rng(13);
  const std::size_t d = 3;
  const std::size_t h = 2;
  ParameterStore ps;
  auto& wf = ps.add("wf", random_tensor({d + h, 4 * h}, rng));
  auto& bf = ps.add("bf", random_tensor({4 * h}, rng));
  auto& wb = ps.add("wb", random_tensor({d + h, 4 * h}, rng));
  auto& bb = ps.add("bb", random_tensor({4 * h}, rng));
  const Tensor x = random_tensor({1, d}, rng);
  Graph g;
  const Var out = bilstm(g, g.constant(x), {g.param(wf), g.param(bf)}, {g.param(wb), g.param(bb)});
  const Var zero = g.constant(Tensor({1, h}));
  const LstmState f = lstm_cell(g, g.constant(x), zero, zero, {g.param(wf), g.param(bf)});
  const LstmState r = lstm_cell(g, g.constant(x), zero, zero, {g.param(wb), g.param(bb)});
  const Var joined = concat_cols(g, {f.h, r.h});
  CHECK(g.value(out) == g.value(joined));
}

TEST_CASE("bilstm reversal symmetry") {
  std::mt19937_64 rng(19);
  const std::size_t d = 2;
  const std::size_t h = 3;
  const std::size_t len = 5;
  ParameterStore ps;
  auto& wf = ps.add("wf", random_tensor({d + h, 4 * h}, rng));
  auto& bf = ps.add("bf", random_tensor({4 * h}, rng));
  auto& wb = ps.add("wb", random_tensor({d + h, 4 * h}, rng));
  auto& bb = ps.add("bb", random_tensor({4 * h}, rng));
  const Tensor seq = random_tensor({len, d}, rng);
  Tensor rev({len, d});
  for (std::size_t t = 0; t < len; ++t) std::copy(seq.row(t), seq.row(t) + d, rev.row(len - 1 - t));
  Graph g;
  const Tensor a = g.value(bilstm(g, g.constant(seq), {g.param(wf), g.param(bf)}, {g.param(wb), g.param(bb)}));
  const Tensor b = g.value(bilstm(g, g.constant(rev), {g.param(wb), g.param(bb)}, {g.param(wf), g.param(bf)}));
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < h; ++j) {
      CHECK(a.at(t, j) == b.at(len - 1 - t, h + j));
      CHECK(a.at(t, h + j) == b.at(len - 1 - t, j));
    }
  }
}

TEST_CASE("bilstm gradients") {
  std::mt19937_64 rng(23);
  const std::size_t d = 2;
  const std::size_t h = 3;
  ParameterStore ps;
  auto& wf = ps.add("wf", random_tensor({d + h, 4 * h}, rng, 0.7));
  auto& bf = ps.add("bf", random_tensor({4 * h}, rng, 0.7));
  auto& wb = ps.add("wb", random_tensor({d + h, 4 * h}, rng, 0.7));
  auto& bb = ps.add("bb", random_tensor({4 * h}, rng, 0.7));
  auto& seq = ps.add("seq", random_tensor({4, d}, rng));
  const Tensor weights = random_tensor({4, 2 * h}, rng);
  const auto report = finite_diff_check(
      [&](Graph& g) {
        return weighted_sum(g, bilstm(g, g.param(seq), {g.param(wf), g.param(bf)}, {g.param(wb), g.param(bb)}),
                            weights);
      },
      ps.all());
  CHECK(report.max_rel_error < 1e-5);
  Graph g;
  CHECK_THROWS_AS(bilstm(g, g.constant(Tensor({0, d})), {g.param(wf), g.param(bf)}, {g.param(wb), g.param(bb)}),
                  EmptySequence);
}

TEST_CASE("attention over identical rows") {
  const Tensor H = Tensor::from_rows({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}});
  Graph g;
  const Var out = dot_attention(g, g.constant(H), g.constant(Tensor::from_rows({{5, -1, 0.5}})));
  CHECK(g.value(out).data == std::vector<double>{1, 2, 3});
}

TEST_CASE("attention with an orthogonal query is uniform") {
  const Tensor H = Tensor::from_rows({{1, 0, 0}, {0, 2, 0}, {3, 3, 0}, {-1, 0, 0}});
  const auto alpha = attention_weights(H, Tensor::from_rows({{0, 0, 1}}));
  for (double a : alpha) CHECK(a == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("attention weights sum to one") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor H = random_tensor({1 + static_cast<std::size_t>(trial % 7), 6}, rng, 1e3);
    const auto alpha = attention_weights(H, random_tensor({1, 6}, rng, 1e3));
    double s = 0.0;
    for (double a : alpha) {
      CHECK(a >= 0.0);
      s += a;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("attention gradients") {
  std::mt19937_64 rng(31);
  ParameterStore ps;
  auto& H = ps.add("H", random_tensor({5, 4}, rng));
  auto& q = ps.add("q", random_tensor({1, 4}, rng));
  const Tensor weights = random_tensor({1, 4}, rng);
  const auto report = finite_diff_check(
      [&](Graph& g) { return weighted_sum(g, dot_attention(g, g.param(H), g.param(q)), weights); }, ps.all());
  CHECK(report.max_rel_error < 1e-5);
}

namespace {

struct BnFixture {
  ParameterStore ps;
  BatchNormState state;
  explicit BnFixture(std::size_t f) {
    state.gamma = &ps.add("gamma", Tensor({f}, 1.0));
    state.beta = &ps.add("beta", Tensor({f}));
    state.running_mean = &ps.add("running_mean", Tensor({f}), false);
    state.running_var = &ps.add("running_var", Tensor({f}, 1.0), false);
  }
};

}  // namespace

TEST_CASE("batchnorm on a constant column") {
  BnFixture bn(2);
  Graph g;
  const Var out = batchnorm(g, g.constant(Tensor::from_rows({{4, 1}, {4, 2}, {4, 3}})), bn.state);
  for (std::size_t r = 0; r < 3; ++r) CHECK(std::abs(g.value(out).at(r, 0)) <= 1e-3);
}

TEST_CASE("batchnorm training output is standardised") {
  std::mt19937_64 rng(37);
  BnFixture bn(5);
  Graph g;
  const std::size_t n = 16;
  const Tensor out = g.value(batchnorm(g, g.constant(random_tensor({n, 5}, rng, 10.0)), bn.state));
  for (std::size_t j = 0; j < 5; ++j) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += out.at(r, j);
    m /= n;
    double v = 0.0;
    for (std::size_t r = 0; r < n; ++r) v += (out.at(r, j) - m) * (out.at(r, j) - m);
    v /= n;
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(v - 1.0) < 1e-6);
  }
}

TEST_CASE("batchnorm running statistics") {
  BnFixture bn(1);
  bn.state.momentum = 0.5;
  Graph g;
  batchnorm(g, g.constant(Tensor::from_rows({{1}, {3}})), bn.state);
  CHECK(bn.state.running_mean->value.data[0] == doctest::Approx(1.0));  // 0.5·0 + 0.5·2
  CHECK(bn.state.running_var->value.data[0] == doctest::Approx(1.5));   // 0.5·1 + 0.5·2 (unbiased)
  bn.state.update_running = false;
  batchnorm(g, g.constant(Tensor::from_rows({{10}, {30}})), bn.state);
  CHECK(bn.state.running_mean->value.data[0] == doctest::Approx(1.0));
}

TEST_CASE("running statistics from split row sets") {
  BnFixture split(2);
  split.state.momentum = 0.5;
  const Tensor a = Tensor::from_rows({{1, -2}, {3, 0}});
  const Tensor b = Tensor::from_rows({{5, 4}});
  update_running_stats(split.state, {&a, &b});
  // Column 0: mean 3, unbiased var 4. Column 1: mean 2/3, unbiased var 28/3.
  CHECK(split.state.running_mean->value.data[0] == doctest::Approx(1.5));
  CHECK(split.state.running_mean->value.data[1] == doctest::Approx(1.0 / 3.0));
  CHECK(split.state.running_var->value.data[0] == doctest::Approx(2.5));
  CHECK(split.state.running_var->value.data[1] == doctest::Approx(0.5 + 14.0 / 3.0));

  BnFixture joint(2);
  joint.state.momentum = 0.5;
  Graph g;
  batchnorm(g, g.constant(Tensor::from_rows({{1, -2}, {3, 0}, {5, 4}})), joint.state);
  CHECK(joint.state.running_mean->value.data == split.state.running_mean->value.data);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(joint.state.running_var->value.data[j] == doctest::Approx(split.state.running_var->value.data[j]));
  }
  const Tensor one = Tensor::from_rows({{1, 1}});
  CHECK_THROWS_AS(update_running_stats(split.state, {&one}), BatchTooSmall);
}

TEST_CASE("batchnorm eval with unit running statistics") {
  BnFixture bn(3);
  bn.state.gamma->value = Tensor::row_vector({2, -1, 0.5});
  bn.state.gamma->value.shape = {3};
  bn.state.beta->value = Tensor::row_vector({1, 0, -1});
  bn.state.beta->value.shape = {3};
  bn.state.mode = NormMode::Eval;
  bn.state.eps = 0.0;
  Graph g;
  const Tensor out = g.value(batchnorm(g, g.constant(Tensor::from_rows({{1, 2, 3}})), bn.state));
  CHECK(out.data == std::vector<double>{3, -2, 0.5});
}

TEST_CASE("batchnorm rejects tiny training batches") {
  BnFixture bn(2);
  Graph g;
  CHECK_THROWS_AS(batchnorm(g, g.constant(Tensor({1, 2})), bn.state), BatchTooSmall);
}

TEST_CASE("batchnorm gradients") {
  std::mt19937_64 rng(41);
  for (NormMode mode : {NormMode::Train, NormMode::Eval}) {
    BnFixture bn(3);
    bn.state.mode = mode;
    bn.state.update_running = false;
    bn.state.gamma->value = random_tensor({3}, rng);
    bn.state.beta->value = random_tensor({3}, rng);
    bn.state.running_var->value = Tensor({3}, 0.7);
    auto& x = bn.ps.add("x", random_tensor({6, 3}, rng));
    const Tensor weights = random_tensor({6, 3}, rng);
    auto params = bn.ps.all();
    params.erase(std::remove_if(params.begin(), params.end(), [](Parameter* p) { return !p->trainable; }),
                 params.end());
    const auto report = finite_diff_check(
        [&](Graph& g) { return weighted_sum(g, batchnorm(g, g.param(x), bn.state), weights); }, params);
    CHECK(report.max_rel_error < 1e-5);
  }
}

TEST_CASE("weighted cross-entropy values") {
  const auto r = weighted_xent(Tensor::from_rows({{0, 0}}), {0}, {1, 1});
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const auto w = weighted_xent(Tensor::from_rows({{0, 0}}), {1}, {1, 10});
  CHECK(w.loss == doctest::Approx(10 * std::log(2.0)).epsilon(1e-15));
  CHECK(positive_probability(Tensor::from_rows({{3, 3}}).data.data()) == 0.5);
}

TEST_CASE("weighted cross-entropy gradients") {
  std::mt19937_64 rng(43);
  ParameterStore ps;
  auto& logits = ps.add("logits", random_tensor({4, 2}, rng, 3.0));
  const std::vector<int> labels = {0, 1, 1, 0};
  const auto report = finite_diff_check(
      [&](Graph& g) { return weighted_xent(g, g.param(logits), labels, {1.0, 7.5}); }, ps.all());
  CHECK(report.max_rel_error < 1e-6);
}

TEST_CASE("adagrad steps") {
  ParameterStore ps;
  auto& p = ps.add("p", Tensor({1}, 0.0));
  AdagradState st;
  st.lr = 0.1;
  st.eps = 1e-8;
  p.grad.data[0] = 1.0;
  adagrad_step(ps.all(), st);
  CHECK(p.value.data[0] == doctest::Approx(-0.1).epsilon(1e-7));
  CHECK(p.grad.data[0] == 0.0);
  p.grad.data[0] = 1.0;
  const double before = p.value.data[0];
  adagrad_step(ps.all(), st);
  CHECK(p.value.data[0] - before == doctest::Approx(-0.1 / std::sqrt(2.0)).epsilon(1e-7));

  const double accum = st.accum.at("p").data[0];
  const double value = p.value.data[0];
  adagrad_step(ps.all(), st);  // zero gradient
  CHECK(p.value.data[0] == value);
  CHECK(st.accum.at("p").data[0] == accum);
}

TEST_CASE("adagrad skips frozen parameters and keeps accumulators monotone") {
  std::mt19937_64 rng(47);
  ParameterStore ps;
  auto& frozen = ps.add("u", Tensor({3}, 0.5), false);
  auto& live = ps.add("w", Tensor({3}));
  AdagradState st;
  std::vector<double> last(3, 0.0);
  for (int step = 0; step < 20; ++step) {
    frozen.grad = random_tensor({3}, rng);
    live.grad = random_tensor({3}, rng);
    adagrad_step(ps.all(), st);
    CHECK(frozen.value.data == std::vector<double>(3, 0.5));
    CHECK(frozen.grad.data == std::vector<double>(3, 0.0));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(st.accum.at("w").data[i] >= last[i]);
      last[i] = st.accum.at("w").data[i];
    }
  }
  CHECK(st.accum.count("u") == 0);
}

TEST_CASE("finite difference checker on known functions") {
  ParameterStore ps;
  auto& t = ps.add("t", Tensor({1, 1}, 3.0));
  const auto sq = finite_diff_check([&](Graph& g) { return mul(g, g.param(t), g.param(t)); }, ps.all());
  CHECK(sq.max_rel_error < 1e-9);

  ParameterStore lin;
  auto& a = lin.add("a", Tensor::from_rows({{1.5, -2, 0.25}}));
  const Tensor c = Tensor::from_rows({{3, 0.5, -7}});
  const auto lr = finite_diff_check([&](Graph& g) { return weighted_sum(g, g.param(a), c); }, lin.all());
  CHECK(lr.max_rel_error < 1e-10);
  CHECK(relative_error(0.0, 0.0) == 0.0);
}

TEST_CASE("ops stay finite on large inputs") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    ParameterStore ps;
    auto& x = ps.add("x", random_tensor({4, 3}, rng, 1e3));
    auto& w = ps.add("w", random_tensor({3, 8}, rng, 1e3));
    auto& b = ps.add("b", random_tensor({8}, rng, 1e3));
    auto& lw = ps.add("lw", random_tensor({3 + 2, 8}, rng, 1e3));
    BnFixture bn(8);
    Graph g;
    const Var t = dense(g, g.param(x), g.param(w), g.param(b), Activation::Tanh);
    const Var s = dense(g, g.param(x), g.param(w), g.param(b), Activation::Sigmoid);
    const Var r = dense(g, g.param(x), g.param(w), g.param(b), Activation::ReLU);
    const Var n = batchnorm(g, r, bn.state);
    const Var seq = bilstm(g, g.param(x), {g.param(lw), g.param(b)}, {g.param(lw), g.param(b)});
    const Var att = dot_attention(g, seq, row(g, seq, 0));
    const Var logits = slice_cols(g, add(g, add(g, t, s), n), 0, 2);
    const Var loss = add(g, weighted_xent(g, logits, {0, 1, 1, 0}, {1, 10}), sum(g, att));
    g.backward(loss);
    for (Var v : {t, s, r, n, seq, att, loss}) CHECK(g.value(v).all_finite());
    for (auto* p : ps.all()) CHECK(p->grad.all_finite());
  }
}

TEST_CASE("checkpoint round trip is bitwise exact") {
  std::mt19937_64 rng(59);
  ParameterStore ps;
  ps.add("a.w", random_tensor({3, 4}, rng));
  ps.add("a.b", random_tensor({4}, rng));
  ps.add("scalar", Tensor({1}, -0.0));
  const std::string path = (std::filesystem::temp_directory_path() / "vulcan_ckpt_test.bin").string();
  save_checkpoint(path, std::as_const(ps).all());
  const std::string bytes = vulcan::read_file(path);
  CHECK(bytes.compare(0, 7, "VULCAN1") == 0);

  ParameterStore other;
  other.add("a.w", Tensor({3, 4}));
  other.add("a.b", Tensor({4}));
  other.add("scalar", Tensor({1}));
  load_checkpoint(path, other);
  CHECK(encode_checkpoint(std::as_const(other).all()) == bytes);
  CHECK(std::signbit(other.get("scalar").value.data[0]));

  ParameterStore wrong;
  wrong.add("a.w", Tensor({4, 3}));
  wrong.add("a.b", Tensor({4}));
  wrong.add("scalar", Tensor({1}));
  CHECK_THROWS_AS(load_checkpoint(path, wrong), CheckpointError);
  ParameterStore missing;
  missing.add("a.w", Tensor({3, 4}));
  CHECK_THROWS_AS(load_checkpoint(path, missing), CheckpointError);

  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CheckpointError);
  CHECK_THROWS_AS(decode_checkpoint("NOTVULC"), CheckpointError);
  std::filesystem::remove(path);
}
