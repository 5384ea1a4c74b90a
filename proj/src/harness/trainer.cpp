#include "vulcan/harness/trainer.hpp"

#include <algorithm>
#include <random>

#include "vulcan/corpus/generator.hpp"
#include "vulcan/nn/adagrad.hpp"
#include "vulcan/seeds.hpp"

namespace vulcan::harness {

namespace {

constexpr std::size_t kEvalPrograms = 16;

std::vector<model::ProgramLines> lines_of(const Dataset& data, const corpus::Corpus& labels,
                                          const std::vector<std::size_t>& idx, const model::ModelConfig& cfg) {
  std::vector<model::ProgramLines> out;
  for (std::size_t i : idx) {
    model::ProgramLines pl{&data.asts[i], {}, {}};
    for (const auto& l : labels[i].labels) {
      if (!model::representable(data.asts[i], l.line, cfg)) continue;
      pl.lines.push_back(l.line);
      pl.labels.push_back(l.label);
    }
    out.push_back(std::move(pl));
  }
  return out;
}

std::vector<nn::Tensor> snapshot(const nn::ParameterStore& ps) {
  std::vector<nn::Tensor> out;
  for (const auto* p : ps.all()) out.push_back(p->value);
  return out;
}

void restore(nn::ParameterStore& ps, const std::vector<nn::Tensor>& values) {
  const auto all = ps.all();
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->value = values[i];
}

}  // namespace

std::vector<LineScore> score_split(model::Model& m, const Dataset& data, corpus::Split split) {
  const auto idx = data.indices(split);
  const auto programs = lines_of(data, data.records, idx, m.config());
  std::vector<LineScore> out;
  for (std::size_t start = 0; start < programs.size(); start += kEvalPrograms) {
    const std::size_t end = std::min(programs.size(), start + kEvalPrograms);
    const std::vector<model::ProgramLines> chunk(programs.begin() + static_cast<std::ptrdiff_t>(start),
                                                 programs.begin() + static_cast<std::ptrdiff_t>(end));
    const auto pred = m.predict(chunk);
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      for (std::size_t j = 0; j < pred[k].lines.size(); ++j) {
        const auto pos = std::find(chunk[k].lines.begin(), chunk[k].lines.end(), pred[k].lines[j]);
        const int label = chunk[k].labels[static_cast<std::size_t>(pos - chunk[k].lines.begin())];
        out.push_back({idx[start + k], pred[k].lines[j], label, pred[k].probabilities[j]});
      }
    }
  }
  return out;
}

Metrics evaluate(model::Model& m, const Dataset& data, corpus::Split split) {
  std::vector<double> probs;
  std::vector<int> labels;
  for (const auto& s : score_split(m, data, split)) {
    probs.push_back(s.probability);
    labels.push_back(s.label);
  }
  return metrics_from_scores(probs, labels);
}

TrainResult train(const Dataset& data, const ExperimentConfig& cfg, const EpochCallback& on_epoch) {
  validate(cfg);
  const auto train_idx = data.indices(corpus::Split::Train);
  if (train_idx.empty()) throw DegenerateTraining("empty train split");
  if (data.indices(corpus::Split::Val).empty()) throw DegenerateTraining("empty validation split");

  // Every epoch keeps all positives and a fresh draw of negatives, so decoy
  // lines are all seen over a run; class weights use the per-epoch counts.
  std::vector<const corpus::CorpusRecord*> train_records;
  for (std::size_t i : train_idx) train_records.push_back(&data.records[i]);
  const auto epoch_programs = [&](int epoch) {
    corpus::Corpus labels = data.records;
    if (cfg.subsample_ratio > 0.0) {
      corpus::Corpus train_only;
      for (const auto* r : train_records) train_only.push_back(*r);
      train_only = corpus::subsample_negatives(train_only, cfg.subsample_ratio,
                                               sub_seed(cfg.seed, "subsample:" + std::to_string(epoch)));
      for (std::size_t k = 0; k < train_idx.size(); ++k) labels[train_idx[k]] = std::move(train_only[k]);
    }
    auto programs = lines_of(data, labels, train_idx, cfg.model);
    programs.erase(std::remove_if(programs.begin(), programs.end(), [](const auto& p) { return p.lines.empty(); }),
                   programs.end());
    return programs;
  };
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& p : epoch_programs(1)) {
    for (int y : p.labels) (y == 1 ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw DegenerateTraining("train split has a single class");

  std::vector<const frontend::Ast*> train_asts;
  for (std::size_t i : train_idx) train_asts.push_back(&data.asts[i]);
  model::Model m(cfg.model, deps::build_vocabs(train_asts, cfg.model.policy()), sub_seed(cfg.seed, "init"));

  const std::array<double, 2> weights =
      cfg.class_weight_rule == "none" ? std::array<double, 2>{1.0, 1.0}
                                      : std::array<double, 2>{1.0, static_cast<double>(neg) / static_cast<double>(pos)};
  nn::AdagradState opt;
  opt.lr = cfg.lr;
  opt.eps = cfg.eps;
  const auto params = m.params().all();

  std::vector<EpochLog> log;
  std::vector<nn::Tensor> best = snapshot(m.params());
  double best_f1 = -1.0;
  int best_epoch = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto programs = epoch_programs(epoch);
    std::mt19937_64 rng(sub_seed(cfg.seed, "shuffle:" + std::to_string(epoch)));
    std::vector<std::size_t> order(programs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    int steps = 0;
    for (std::size_t i = 0; i < order.size();) {
      std::vector<model::ProgramLines> batch;
      std::size_t n = 0;
      while (i < order.size() && n < static_cast<std::size_t>(cfg.batch_lines)) {
        batch.push_back(programs[order[i++]]);
        n += batch.back().lines.size();
      }
      nn::Graph g(true);
      const nn::Var l = m.loss(g, batch, weights, nn::NormMode::Train, true);
      loss_sum += g.value(l).data[0];
      g.backward(l);
      nn::adagrad_step(params, opt);
      ++steps;
    }

    EpochLog e{epoch, steps > 0 ? loss_sum / steps : 0.0, evaluate(m, data, corpus::Split::Val)};
    log.push_back(e);
    if (on_epoch) on_epoch(e);
    if (f1_or_zero(e.val) > best_f1) {
      best_f1 = f1_or_zero(e.val);
      best_epoch = epoch;
      best = snapshot(m.params());
    } else if (epoch - best_epoch >= cfg.patience) {
      break;
    }
  }
  restore(m.params(), best);
  return TrainResult{std::move(m), std::move(log), best_epoch, weights, pos, neg};
}

}  // namespace vulcan::harness
