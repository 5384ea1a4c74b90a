#include "vulcan/model/model.hpp"

#include <algorithm>
#include <iterator>

#include <json.hpp>

#include "vulcan/io.hpp"
#include "vulcan/nn/attention.hpp"
#include "vulcan/nn/checkpoint.hpp"
#include "vulcan/nn/loss.hpp"
#include "vulcan/nn/lstm.hpp"
#include "vulcan/nn/ops.hpp"

namespace vulcan::model {

using nn::Activation;
using nn::Graph;
using nn::NormMode;
using nn::SlotInput;
using nn::Tensor;
using nn::Var;

namespace {

std::size_t z(int v) { return static_cast<std::size_t>(v); }

std::vector<TokenSlot> slots_for(const deps::Ast& ast, int line, const deps::Vocab& vocab, const ModelConfig& cfg) {
  auto slots = plan_slots(ast, line, vocab, cfg);
  if (cfg.no_endpoints) {
    for (auto& s : slots) {
      s.define = TokenSlot::Define::Undefined;
      s.index = 0;
    }
  }
  return slots;
}

}  // namespace

Model::Model(ModelConfig cfg, deps::Vocab vocab, std::uint64_t seed)
    : cfg_(cfg), vocab_(std::move(vocab)), params_(init_params(cfg_, vocab_, seed)) {}

Model::Model(ModelConfig cfg, deps::Vocab vocab, nn::ParameterStore params)
    : cfg_(cfg), vocab_(std::move(vocab)), params_(std::move(params)) {
  validate(cfg_);
}

nn::BatchNormState Model::bn_state(const std::string& prefix, NormMode mode, bool update_running) {
  nn::BatchNormState s;
  s.gamma = &p(prefix + ".gamma");
  s.beta = &p(prefix + ".beta");
  s.running_mean = &p(prefix + ".running_mean");
  s.running_var = &p(prefix + ".running_var");
  s.mode = mode;
  s.update_running = update_running;
  return s;
}

Var Model::path_vector(Graph& g, const std::vector<int>& path) {
  if (path.empty()) throw Error(ErrorCategory::Internal, "empty context path");
  const std::size_t h = z(cfg_.lstm_hidden);
  const Var seq = nn::gather_rows(g, g.param(p("path.embedding")), path);
  const nn::LstmWeights fwd{g.param(p("lstm.fwd.w")), g.param(p("lstm.fwd.b"))};
  const nn::LstmWeights bwd{g.param(p("lstm.bwd.w")), g.param(p("lstm.bwd.b"))};
  const Var H = nn::bilstm(g, seq, fwd, bwd);
  const Var last = nn::row(g, H, path.size() - 1);
  const Var first = nn::row(g, H, 0);
  // Final states of both directions.
  const Var query = nn::concat_cols(g, {nn::slice_cols(g, last, 0, h), nn::slice_cols(g, first, h, 2 * h)});
  if (cfg_.no_attn) {
    return nn::dense(g, query, g.param(p("context.final_state.w")), g.param(p("context.final_state.b")),
                     Activation::Tanh);
  }
  const Var att = nn::dot_attention(g, H, query);
  return nn::dense(g, nn::concat_cols(g, {att, query}), g.param(p("context.readout.w")),
                   g.param(p("context.readout.b")), Activation::Tanh);
}

namespace {

// Fewer rows than this are normalised with the running statistics even in
// training: two rows normalise to ±1 whatever their values.
constexpr std::size_t kMinBatchStatRows = 4;

// dense(no bias) -> batch norm -> ReLU -> dense -> tanh.
Var feed_forward(Graph& g, nn::ParameterStore& ps, const std::string& prefix, std::size_t rows,
                 const std::vector<SlotInput>& inputs, NormMode mode, bool update_running,
                 std::vector<const Tensor*>* pre_norm = nullptr) {
  Var h = nn::block_dense(g, rows, inputs, g.param(ps.get(prefix + ".w1")), std::nullopt, Activation::Identity);
  if (pre_norm) pre_norm->push_back(&g.value(h));
  nn::BatchNormState bn;
  bn.gamma = &ps.get(prefix + ".bn.gamma");
  bn.beta = &ps.get(prefix + ".bn.beta");
  bn.running_mean = &ps.get(prefix + ".bn.running_mean");
  bn.running_var = &ps.get(prefix + ".bn.running_var");
  bn.mode = rows < kMinBatchStatRows ? NormMode::Eval : mode;
  bn.update_running = update_running;
  h = nn::activate(g, nn::batchnorm(g, h, bn), Activation::ReLU);
  return nn::dense(g, h, g.param(ps.get(prefix + ".w2")), g.param(ps.get(prefix + ".b2")), Activation::Tanh);
}

}  // namespace

Var Model::assemble_line(Graph& g, const std::vector<TokenSlot>& slots, const std::vector<Var>& define_rows,
                         Var context) {
  std::vector<SlotInput> in;
  const std::size_t t = z(cfg_.t);
  std::size_t ctx_offset = 0;
  if (!cfg_.no_endpoints) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      switch (slots[i].define) {
        case TokenSlot::Define::OneHot:
          in.push_back({0, i * t, g.param(p("define.op_embedding")), z(slots[i].index)});
          break;
        case TokenSlot::Define::Undefined:
          in.push_back({0, i * t, g.param(p("define.undefined")), 0});
          break;
        case TokenSlot::Define::Line:
          in.push_back({0, i * t, define_rows[i], 0});
          break;
      }
    }
    ctx_offset = z(cfg_.max_tokens_per_line) * t;
  }
  in.push_back({0, ctx_offset, context, 0});
  return feed_forward(g, params_, "ffn_b", 1, in, NormMode::Eval, false);
}

Tensor Model::stage2_context(const std::vector<std::optional<std::vector<int>>>& paths) {
  if (paths.size() > z(cfg_.max_tokens_per_line)) throw Error(ErrorCategory::Internal, "more paths than token slots");
  Graph g(false);
  std::vector<SlotInput> in;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i]) in.push_back({0, i * z(cfg_.path_dim), path_vector(g, *paths[i]), 0});
  }
  Tensor out = g.value(feed_forward(g, params_, "ffn_a", 1, in, NormMode::Eval, false));
  out.shape = {out.size()};
  return out;
}

double Model::classify_line(const Tensor& rep) {
  Graph g(false);
  Tensor x = rep;
  x.shape = {1, rep.size()};
  const Var h = nn::dense(g, g.constant(std::move(x)), g.param(p("ffn_c.w1")), g.param(p("ffn_c.b1")),
                          Activation::ReLU);
  const Var logits = nn::dense(g, h, g.param(p("ffn_c.w2")), g.param(p("ffn_c.b2")), Activation::Identity);
  return nn::positive_probability(g.value(logits).row(0));
}

Tensor Model::represent_line(const deps::Ast& ast, int line) {
  MemoTable memo;
  return represent_line(ast, line, memo);
}

Tensor Model::represent_line(const deps::Ast& ast, int line, MemoTable& memo) {
  if (!representable(ast, line, cfg_)) {
    throw Error(ErrorCategory::Data, "line " + std::to_string(line) + " cannot be represented");
  }
  return represent_rec(ast, line, memo, 1);
}

Tensor Model::represent_rec(const deps::Ast& ast, int line, MemoTable& memo, int depth) {
  if (memo.enabled) {
    if (const auto it = memo.reps.find(line); it != memo.reps.end()) return it->second;
  }
  if (depth > cfg_.max_recursion_depth) throw RecursionDepthExceeded(line, depth);
  memo.max_depth = std::max(memo.max_depth, depth);
  memo.in_progress.insert(line);

  auto slots = slots_for(ast, line, vocab_, cfg_);
  std::vector<Tensor> defines(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    auto& s = slots[i];
    if (s.define != TokenSlot::Define::Line) continue;
    if (memo.in_progress.count(s.index) > 0) {
      s.define = TokenSlot::Define::Undefined;
      s.index = 0;
      continue;
    }
    defines[i] = represent_rec(ast, s.index, memo, depth + 1);
  }

  Graph g(false);
  std::vector<SlotInput> ctx_in;
  std::vector<Var> define_rows(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].path) ctx_in.push_back({0, i * z(cfg_.path_dim), path_vector(g, *slots[i].path), 0});
    if (slots[i].define == TokenSlot::Define::Line) {
      Tensor d = defines[i];
      d.shape = {1, d.size()};
      define_rows[i] = g.constant(std::move(d));
    }
  }
  const Var ctx = feed_forward(g, params_, "ffn_a", 1, ctx_in, NormMode::Eval, false);
  Tensor out = g.value(assemble_line(g, slots, define_rows, ctx));
  out.shape = {out.size()};

  memo.in_progress.erase(line);
  if (memo.enabled) memo.reps[line] = out;
  memo.visited.push_back(line);
  return out;
}

ForwardResult Model::forward(Graph& g, const std::vector<ProgramLines>& batch, NormMode mode, bool update_running) {
  ForwardResult res;
  std::vector<ProgramPlan> plans;
  std::vector<std::size_t> base;
  std::size_t total = 0;
  for (const auto& pl : batch) {
    plans.push_back(plan_program(*pl.ast, pl.lines, vocab_, cfg_));
    base.push_back(total);
    total += plans.back().nodes.size();
    res.max_depth = std::max(res.max_depth, plans.back().max_depth);
  }
  if (total == 0) return res;

  // Each distinct context path once.
  std::map<std::vector<int>, std::size_t> path_ids;
  std::vector<Var> path_vars;
  for (const auto& plan : plans) {
    for (const auto& node : plan.nodes) {
      for (const auto& s : node.slots) {
        if (!s.path || path_ids.count(*s.path) > 0) continue;
        path_ids.emplace(*s.path, path_vars.size());
        path_vars.push_back(path_vector(g, *s.path));
      }
    }
  }
  Var paths;
  if (!path_vars.empty()) paths = path_vars.size() == 1 ? path_vars.front() : nn::stack_rows(g, path_vars);

  std::vector<SlotInput> ctx_in;
  int max_level = 0;
  for (std::size_t k = 0; k < plans.size(); ++k) {
    for (std::size_t n = 0; n < plans[k].nodes.size(); ++n) {
      const auto& node = plans[k].nodes[n];
      max_level = std::max(max_level, node.level);
      for (std::size_t i = 0; i < node.slots.size(); ++i) {
        if (node.slots[i].path) {
          ctx_in.push_back({base[k] + n, i * z(cfg_.path_dim), paths, path_ids.at(*node.slots[i].path)});
        }
      }
    }
  }
  const Var ctx = feed_forward(g, params_, "ffn_a", total, ctx_in, mode, update_running);

  // Line assembly level by level so every define row exists before use. A
  // level holds lines of very different depth mixes, so its own statistics
  // would not match inference; assembly is normalised with the running
  // statistics, which are refreshed from all assembled rows of the call.
  std::vector<const Tensor*> pre_norm;
  std::vector<Var> level_out(z(max_level) + 1);
  std::vector<std::size_t> row_in_level(total);
  std::vector<int> level_of(total);
  const std::size_t t = z(cfg_.t);
  const std::size_t ctx_offset = cfg_.no_endpoints ? 0 : z(cfg_.max_tokens_per_line) * t;
  for (int lvl = 0; lvl <= max_level; ++lvl) {
    std::vector<SlotInput> in;
    std::size_t rows = 0;
    for (std::size_t k = 0; k < plans.size(); ++k) {
      for (std::size_t n = 0; n < plans[k].nodes.size(); ++n) {
        const auto& node = plans[k].nodes[n];
        if (node.level != lvl) continue;
        const std::size_t gid = base[k] + n;
        const std::size_t r = rows++;
        row_in_level[gid] = r;
        level_of[gid] = lvl;
        if (!cfg_.no_endpoints) {
          for (std::size_t i = 0; i < node.slots.size(); ++i) {
            const auto& s = node.slots[i];
            switch (s.define) {
              case TokenSlot::Define::OneHot:
                in.push_back({r, i * t, g.param(p("define.op_embedding")), z(s.index)});
                break;
              case TokenSlot::Define::Undefined:
                in.push_back({r, i * t, g.param(p("define.undefined")), 0});
                break;
              case TokenSlot::Define::Line: {
                const std::size_t dep = base[k] + z(node.deps[i]);
                in.push_back({r, i * t, level_out[z(level_of[dep])], row_in_level[dep]});
                break;
              }
            }
          }
        }
        in.push_back({r, ctx_offset, ctx, gid});
      }
    }
    if (rows > 0) level_out[z(lvl)] = feed_forward(g, params_, "ffn_b", rows, in, NormMode::Eval, false, &pre_norm);
  }
  if (mode == NormMode::Train && update_running && total >= 2) {
    auto bn = bn_state("ffn_b.bn", mode, true);
    nn::update_running_stats(bn, pre_norm);
  }

  std::vector<Var> rep_rows;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    for (int line : batch[k].lines) {
      const auto it = plans[k].node_of_line.find(line);
      if (it == plans[k].node_of_line.end()) continue;
      const std::size_t gid = base[k] + z(it->second);
      rep_rows.push_back(nn::row(g, level_out[z(level_of[gid])], row_in_level[gid]));
      res.targets.emplace_back(k, line);
    }
  }
  if (rep_rows.empty()) return res;
  res.reps = rep_rows.size() == 1 ? rep_rows.front() : nn::stack_rows(g, rep_rows);
  const Var h = nn::dense(g, res.reps, g.param(p("ffn_c.w1")), g.param(p("ffn_c.b1")), Activation::ReLU);
  res.logits = nn::dense(g, h, g.param(p("ffn_c.w2")), g.param(p("ffn_c.b2")), Activation::Identity);
  return res;
}

Var Model::loss(Graph& g, const std::vector<ProgramLines>& batch, const std::array<double, 2>& class_weights,
                NormMode mode, bool update_running) {
  const ForwardResult fw = forward(g, batch, mode, update_running);
  if (!fw.logits.valid()) return {};
  std::vector<std::map<int, int>> label_of(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (batch[k].labels.size() != batch[k].lines.size()) {
      throw Error(ErrorCategory::Internal, "lines and labels differ in length");
    }
    for (std::size_t i = 0; i < batch[k].lines.size(); ++i) label_of[k][batch[k].lines[i]] = batch[k].labels[i];
  }
  std::vector<int> labels;
  for (const auto& [k, line] : fw.targets) labels.push_back(label_of[k].at(line));
  return nn::weighted_xent(g, fw.logits, labels, class_weights);
}

std::vector<ProgramOutput> Model::predict(const std::vector<ProgramLines>& batch) {
  Graph g(false);
  const ForwardResult fw = forward(g, batch, NormMode::Eval, false);
  std::vector<ProgramOutput> out(batch.size());
  for (std::size_t i = 0; i < fw.targets.size(); ++i) {
    const auto& [k, line] = fw.targets[i];
    out[k].lines.push_back(line);
    out[k].probabilities.push_back(nn::positive_probability(g.value(fw.logits).row(i)));
  }
  return out;
}

ProgramOutput Model::forward_program(const deps::Ast& ast, const std::vector<int>& lines,
                                     const std::vector<int>& labels, const std::array<double, 2>& class_weights,
                                     NormMode mode) {
  Graph g(true);
  const std::vector<ProgramLines> batch{{&ast, lines, labels}};
  ProgramOutput out;
  const ForwardResult fw = forward(g, batch, mode, false);
  if (!fw.logits.valid()) return out;
  std::map<int, int> label_of;
  for (std::size_t i = 0; i < lines.size(); ++i) label_of[lines[i]] = labels.at(i);
  std::vector<int> ys;
  for (std::size_t i = 0; i < fw.targets.size(); ++i) {
    out.lines.push_back(fw.targets[i].second);
    out.probabilities.push_back(nn::positive_probability(g.value(fw.logits).row(i)));
    ys.push_back(label_of.at(fw.targets[i].second));
  }
  const Var l = nn::weighted_xent(g, fw.logits, ys, class_weights);
  out.loss = g.value(l).data[0];
  g.backward(l);
  return out;
}

void Model::save(const std::string& path) const {
  nlohmann::json meta;
  meta["format"] = "vulcan-model";
  meta["variant"] = std::string(to_string(cfg_.variant()));
  meta["config"] = cfg_;
  meta["vocab"] = vocab_;
  write_file_atomically(path, nn::encode_checkpoint(params_.all()));
  write_file_atomically(path + ".meta.json", meta.dump(2) + "\n");
}

Model Model::load(const std::string& path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(path + ".meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::Data, path + ".meta.json: " + e.what());
  }
  ModelConfig cfg;
  deps::Vocab vocab;
  try {
    cfg = meta.at("config").get<ModelConfig>();
    vocab = meta.at("vocab").get<deps::Vocab>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::Data, path + ".meta.json: " + e.what());
  }
  Model m(cfg, vocab, 0);
  nn::assign_checkpoint(nn::read_checkpoint(path), m.params_);
  return m;
}

std::vector<std::string> removed_parameters(Variant v, const deps::Vocab& vocab) {
  auto full = init_params(ModelConfig{}, vocab, 0).names();
  auto other = init_params(apply_variant(ModelConfig{}, v), vocab, 0).names();
  std::sort(full.begin(), full.end());
  std::sort(other.begin(), other.end());
  std::vector<std::string> out;
  std::set_difference(full.begin(), full.end(), other.begin(), other.end(), std::back_inserter(out));
  return out;
}

}  // namespace vulcan::model
