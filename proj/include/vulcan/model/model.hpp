#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vulcan/deps/vocab.hpp"
#include "vulcan/model/config.hpp"
#include "vulcan/model/params.hpp"
#include "vulcan/model/plan.hpp"
#include "vulcan/nn/batchnorm.hpp"
#include "vulcan/nn/graph.hpp"

namespace vulcan::model {

/// Per-program cache for the recursive line representation.
struct MemoTable {
  std::map<int, nn::Tensor> reps;
  std::set<int> in_progress;
  bool enabled = true;
  int max_depth = 0;
  /// Every line whose representation was computed (or reused), in order of completion.
  std::vector<int> visited;
};

/// The labelled lines of one program fed to a batched forward pass.
struct ProgramLines {
  const deps::Ast* ast = nullptr;
  std::vector<int> lines;
  std::vector<int> labels;  // parallel to lines; may be empty for inference
};

struct ForwardResult {
  nn::Var logits;           // [N, 2], targets in input order
  nn::Var reps;             // [N, t]
  std::vector<std::pair<std::size_t, int>> targets;  // (program index, line) per row
  int max_depth = 0;
};

struct ProgramOutput {
  std::vector<int> lines;
  std::vector<double> probabilities;
  double loss = 0.0;
};

class Model {
 public:
  Model(ModelConfig cfg, deps::Vocab vocab, std::uint64_t seed);
  Model(ModelConfig cfg, deps::Vocab vocab, nn::ParameterStore params);

  const ModelConfig& config() const { return cfg_; }
  const deps::Vocab& vocab() const { return vocab_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

  /// Recursive line representation with inference-mode normalisation.
  nn::Tensor represent_line(const deps::Ast& ast, int line, MemoTable& memo);
  nn::Tensor represent_line(const deps::Ast& ast, int line);

  /// Fused context vector [q] for up to 16 slot paths (nullopt = no path).
  nn::Tensor stage2_context(const std::vector<std::optional<std::vector<int>>>& paths);

  /// softmax(FFN_C(rep))[1].
  double classify_line(const nn::Tensor& rep);

  /// One recorded forward pass over the representable lines of several
  /// programs. Shared dependencies are computed once per program and every
  /// distinct context path once per call. Train mode normalises with batch
  /// statistics (per recursion level for line assembly) and, when
  /// `update_running` is set, folds them into the running statistics.
  ForwardResult forward(nn::Graph& g, const std::vector<ProgramLines>& batch, nn::NormMode mode,
                        bool update_running = true);

  /// Weighted cross-entropy over the labelled lines; an empty batch yields an invalid Var.
  nn::Var loss(nn::Graph& g, const std::vector<ProgramLines>& batch, const std::array<double, 2>& class_weights,
               nn::NormMode mode, bool update_running = true);

  /// Inference probabilities for the representable lines of each program.
  std::vector<ProgramOutput> predict(const std::vector<ProgramLines>& batch);

  /// Probabilities, loss and parameter gradients for one program's labelled lines.
  ProgramOutput forward_program(const deps::Ast& ast, const std::vector<int>& lines, const std::vector<int>& labels,
                                const std::array<double, 2>& class_weights, nn::NormMode mode = nn::NormMode::Eval);

  /// Checkpoint plus a `<path>.meta.json` sidecar with the config and vocabularies.
  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  ModelConfig cfg_;
  deps::Vocab vocab_;
  nn::ParameterStore params_;

  nn::Parameter& p(const std::string& name) { return params_.get(name); }
  nn::BatchNormState bn_state(const std::string& prefix, nn::NormMode mode, bool update_running);
  nn::Var path_vector(nn::Graph& g, const std::vector<int>& path);
  nn::Tensor represent_rec(const deps::Ast& ast, int line, MemoTable& memo, int depth);
  nn::Var assemble_line(nn::Graph& g, const std::vector<TokenSlot>& slots, const std::vector<nn::Var>& define_rows,
                        nn::Var context);
};

/// Names present in the full model but absent from `v`'s parameter set.
std::vector<std::string> removed_parameters(Variant v, const deps::Vocab& vocab);

}  // namespace vulcan::model
