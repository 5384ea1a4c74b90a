#include "vulcan/model/params.hpp"

#include <cmath>
#include <random>

#include "vulcan/seeds.hpp"

namespace vulcan::model {

using nn::Tensor;

namespace {

Tensor uniform(std::vector<std::size_t> shape, double limit, std::uint64_t seed, const std::string& name) {
  Tensor t(std::move(shape));
  std::mt19937_64 rng(sub_seed(seed, "init:" + name));
  std::uniform_real_distribution<double> d(-limit, limit);
  for (double& v : t.data) v = d(rng);
  return t;
}

Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed, const std::string& name) {
  return uniform({fan_in, fan_out}, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), seed, name);
}

void add_glorot(nn::ParameterStore& s, const std::string& name, std::size_t in, std::size_t out, std::uint64_t seed) {
  s.add(name, glorot(in, out, seed, name));
}

void add_batchnorm(nn::ParameterStore& s, const std::string& prefix, std::size_t width) {
  s.add(prefix + ".gamma", Tensor({width}, 1.0));
  s.add(prefix + ".beta", Tensor({width}, 0.0));
  s.add(prefix + ".running_mean", Tensor({width}, 0.0), false);
  s.add(prefix + ".running_var", Tensor({width}, 1.0), false);
}

void add_lstm(nn::ParameterStore& s, const std::string& prefix, std::size_t in, std::size_t h, std::uint64_t seed) {
  const std::string w = prefix + ".w";
  s.add(w, uniform({in + h, 4 * h}, std::sqrt(6.0 / static_cast<double>(in + 2 * h)), seed, w));
  Tensor b({4 * h}, 0.0);
  for (std::size_t j = h; j < 2 * h; ++j) b.data[j] = 1.0;
  s.add(prefix + ".b", std::move(b));
}

}  // namespace

nn::ParameterStore init_params(const ModelConfig& cfg, const deps::Vocab& vocab, std::uint64_t seed) {
  validate(cfg);
  const auto z = [](int v) { return static_cast<std::size_t>(v); };
  const std::size_t slots = z(cfg.max_tokens_per_line);
  const std::size_t h = z(cfg.lstm_hidden);
  nn::ParameterStore s;

  add_glorot(s, "path.embedding", z(vocab.node_kind_size()), z(cfg.step_embedding), seed);
  add_lstm(s, "lstm.fwd", z(cfg.step_embedding), h, seed);
  add_lstm(s, "lstm.bwd", z(cfg.step_embedding), h, seed);
  if (cfg.no_attn) {
    add_glorot(s, "context.final_state.w", 2 * h, z(cfg.path_dim), seed);
    s.add("context.final_state.b", Tensor({z(cfg.path_dim)}, 0.0));
  } else {
    add_glorot(s, "context.readout.w", 4 * h, z(cfg.path_dim), seed);
    s.add("context.readout.b", Tensor({z(cfg.path_dim)}, 0.0));
  }

  add_glorot(s, "ffn_a.w1", slots * z(cfg.path_dim), z(cfg.ffn_a_hidden), seed);
  add_batchnorm(s, "ffn_a.bn", z(cfg.ffn_a_hidden));
  add_glorot(s, "ffn_a.w2", z(cfg.ffn_a_hidden), z(cfg.q), seed);
  s.add("ffn_a.b2", Tensor({z(cfg.q)}, 0.0));

  if (!cfg.no_endpoints) {
    s.add("define.op_embedding", uniform({z(vocab.define_size()), z(cfg.t)}, 1.0, seed, "define.op_embedding"));
    s.add("define.undefined", uniform({1, z(cfg.t)}, 1.0, seed, "define.undefined"), false);
  }
  const std::size_t b_in = (cfg.no_endpoints ? 0 : slots * z(cfg.t)) + z(cfg.q);
  add_glorot(s, "ffn_b.w1", b_in, z(cfg.ffn_b_hidden), seed);
  add_batchnorm(s, "ffn_b.bn", z(cfg.ffn_b_hidden));
  add_glorot(s, "ffn_b.w2", z(cfg.ffn_b_hidden), z(cfg.t), seed);
  s.add("ffn_b.b2", Tensor({z(cfg.t)}, 0.0));

  add_glorot(s, "ffn_c.w1", z(cfg.t), z(cfg.ffn_c_hidden), seed);
  s.add("ffn_c.b1", Tensor({z(cfg.ffn_c_hidden)}, 0.0));
  add_glorot(s, "ffn_c.w2", z(cfg.ffn_c_hidden), 2, seed);
  s.add("ffn_c.b2", Tensor({2}, 0.0));
  return s;
}

}  // namespace vulcan::model
