#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vulcan/corpus/corpus_io.hpp"
#include "vulcan/corpus/generator.hpp"
#include "vulcan/corpus/oracle.hpp"
#include "vulcan/corpus/similarity.hpp"
#include "vulcan/deps/dependence.hpp"
#include "vulcan/deps/vocab.hpp"
#include "vulcan/harness/ablation.hpp"
#include "vulcan/harness/bow.hpp"
#include "vulcan/harness/results.hpp"
#include "vulcan/harness/similarity_experiment.hpp"
#include "vulcan/harness/trainer.hpp"
#include "vulcan/io.hpp"
#include "vulcan/model/model.hpp"
#include "vulcan/nn/gradcheck.hpp"

using namespace vulcan;
using nlohmann::json;

namespace {

// Default program for `gradcheck`: three assignment lines, one builtin call.
constexpr const char* kGradcheckProgram =
    "func f(a, b) {\n"
    "    var c = a / b\n"
    "    var e = b - max(a, 1)\n"
    "    c = c * e + a\n"
    "}";

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("VULCAN_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCategory::Usage, std::string("VULCAN_SEED is not an unsigned integer: ") + env);
  }
  return 1;
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::Usage, "bad seed list: " + list);
    }
  }
  if (out.empty()) throw Error(ErrorCategory::Usage, "empty seed list");
  return out;
}

model::Variant parse_variant(const std::string& name) {
  const auto v = model::variant_from_string(name);
  if (!v) throw Error(ErrorCategory::Usage, "unknown variant: " + name);
  return *v;
}

template <typename T>
std::string show(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// Training flags shared by train and ablate. Unset flags leave the
/// defaults or the --config values in place.
struct TrainingFlags {
  std::string config_path;
  std::optional<double> lr;
  std::optional<int> batch_lines;
  std::optional<int> max_epochs;
  std::optional<int> patience;
  std::optional<double> subsample_ratio;
  std::optional<std::string> class_weights;

  void add(CLI::App* app) {
    const harness::ExperimentConfig d;
    app->add_option("--config", config_path, "Experiment config file (JSON or key=value lines)");
    app->add_option("--lr", lr, "Adagrad learning rate [default: " + show(d.lr) + "]");
    app->add_option("--batch-lines", batch_lines,
                    "Labelled lines per update [default: " + show(d.batch_lines) + "]");
    app->add_option("--max-epochs", max_epochs, "Epoch limit [default: " + show(d.max_epochs) + "]");
    app->add_option("--patience", patience,
                    "Epochs without a better validation F1 before stopping [default: " + show(d.patience) +
                        "]");
    app->add_option("--subsample-ratio", subsample_ratio,
                    "Train negatives kept per positive, 0 keeps all [default: " +
                        show(d.subsample_ratio) + "]");
    app->add_option("--class-weights", class_weights,
                    "inverse_frequency or none [default: " + d.class_weight_rule + "]");
  }

  harness::ExperimentConfig resolve() const {
    harness::ExperimentConfig cfg;
    if (!config_path.empty()) harness::apply_experiment_config_text(read_file(config_path), cfg);
    if (lr) cfg.lr = *lr;
    if (batch_lines) cfg.batch_lines = *batch_lines;
    if (max_epochs) cfg.max_epochs = *max_epochs;
    if (patience) cfg.patience = *patience;
    if (subsample_ratio) cfg.subsample_ratio = *subsample_ratio;
    if (class_weights) cfg.class_weight_rule = *class_weights;
    return cfg;
  }
};

json epoch_json(const harness::EpochLog& e) {
  return json{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val", e.val}};
}

void print_epoch(const harness::EpochLog& e) {
  std::cerr << "epoch " << e.epoch << " loss " << e.train_loss << " val_f1 " << harness::format_ratio(e.val.f1)
            << "\n";
}

harness::Dataset load_dataset(const std::string& path) { return harness::make_dataset(corpus::load_corpus(path)); }

corpus::Split parse_split(const std::string& name) {
  const auto s = corpus::split_from_string(name);
  if (!s) throw Error(ErrorCategory::Usage, "unknown split: " + name);
  return *s;
}

int run(int argc, char** argv) {
  CLI::App app{"Line-level vulnerability detection on MiniSol programs"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a labelled corpus or similarity triplets");
  std::optional<std::uint64_t> gen_seed;
  int gen_programs = 200;
  int gen_min_lines = corpus::SizeSpec{}.min_lines;
  int gen_max_lines = corpus::SizeSpec{}.max_lines;
  double gen_noise = 0.0;
  int gen_triplets = 0;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Master seed (falls back to VULCAN_SEED, then 1)");
  gen->add_option("--programs", gen_programs, "Number of programs")->check(CLI::PositiveNumber);
  gen->add_option("--min-lines", gen_min_lines, "Minimum program length");
  gen->add_option("--max-lines", gen_max_lines, "Maximum program length");
  gen->add_option("--label-noise", gen_noise, "Label flip probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--triplets", gen_triplets, "Write this many similarity triplets instead of a corpus");
  gen->add_option("--out", gen_out, "Output JSONL")->required();

  // extract
  auto* ext = app.add_subcommand("extract", "Print tokens, end-points and AST paths of a program's lines");
  std::string ext_file;
  int ext_line = 0;
  bool ext_prev = false;
  ext->add_option("--file", ext_file, "MiniSol source file")->required();
  ext->add_option("--line", ext_line, "Only this line (0 = every line)");
  ext->add_flag("--prev-line", ext_prev, "End-point is the preceding statement line");

  // train
  auto* tr = app.add_subcommand("train", "Train a model on the train split");
  std::string tr_corpus, tr_out, tr_variant = "full";
  std::optional<std::uint64_t> tr_seed;
  TrainingFlags tr_flags;
  tr->add_option("--corpus", tr_corpus, "Corpus JSONL")->required();
  tr->add_option("--variant", tr_variant, "full, no_endpoints, prev_line or no_attn");
  tr->add_option("--seed", tr_seed, "Master seed (falls back to VULCAN_SEED, then 1)");
  tr->add_option("--out", tr_out, "Checkpoint path; the log goes to <out>.log.json")->required();
  tr_flags.add(tr);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  std::string ev_model, ev_corpus, ev_split = "test", ev_out;
  ev->add_option("--model", ev_model, "Checkpoint")->required();
  ev->add_option("--corpus", ev_corpus, "Corpus JSONL")->required();
  ev->add_option("--split", ev_split, "train, val or test");
  ev->add_option("--out", ev_out, "Results stem: writes <out>.csv and <out>.json");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Train every variant over several seeds");
  std::string ab_corpus, ab_out, ab_seeds = "1,2,3", ab_variants = "full,no_endpoints,prev_line,no_attn";
  TrainingFlags ab_flags;
  ab->add_option("--corpus", ab_corpus, "Corpus JSONL")->required();
  ab->add_option("--seeds", ab_seeds, "Comma-separated seeds");
  ab->add_option("--variants", ab_variants, "Comma-separated variants");
  ab->add_option("--out", ab_out, "Results stem: writes <out>.csv and <out>.json")->required();
  ab_flags.add(ab);

  // baselines
  auto* bl = app.add_subcommand("baselines", "Bag-of-words logistic regression baselines");
  std::string bl_corpus, bl_out, bl_seeds = "1,2,3", bl_modes = "tok,nodes,paths";
  harness::BowConfig bl_cfg;
  bl->add_option("--corpus", bl_corpus, "Corpus JSONL")->required();
  bl->add_option("--seeds", bl_seeds, "Comma-separated seeds");
  bl->add_option("--modes", bl_modes, "Comma-separated feature modes: tok, nodes, paths");
  bl->add_option("--lr", bl_cfg.lr, "Gradient descent step");
  bl->add_option("--iterations", bl_cfg.iterations, "Full-batch gradient steps");
  bl->add_option("--subsample-ratio", bl_cfg.subsample_ratio, "Train negatives kept per positive, 0 keeps all");
  bl->add_option("--class-weights", bl_cfg.class_weight_rule, "inverse_frequency or none");
  bl->add_option("--out", bl_out, "Results stem: writes <out>.csv and <out>.json")->required();

  // sim
  auto* sim = app.add_subcommand("sim", "Distances between line representations of similarity triplets");
  std::string sim_model, sim_triplets, sim_out;
  int sim_count = 20;
  std::optional<std::uint64_t> sim_seed;
  sim->add_option("--model", sim_model, "Checkpoint")->required();
  sim->add_option("--triplets", sim_triplets, "Triplet JSONL (generated from --count/--seed when absent)");
  sim->add_option("--count", sim_count, "Triplets to generate")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Generation seed (falls back to VULCAN_SEED, then 1)");
  sim->add_option("--out", sim_out, "Distance table CSV (stdout when absent)");

  // predict
  auto* pr = app.add_subcommand("predict", "Probability that one line is vulnerable");
  std::string pr_model, pr_file;
  int pr_line = 0;
  pr->add_option("--model", pr_model, "Checkpoint")->required();
  pr->add_option("--file", pr_file, "MiniSol source file")->required();
  pr->add_option("--line", pr_line, "1-based line number")->required()->check(CLI::PositiveNumber);

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the full model loss");
  std::string gc_file, gc_variant = "full";
  std::optional<std::uint64_t> gc_seed;
  nn::GradCheckOptions gc_opts;
  gc_opts.h = 1e-5;
  gc_opts.max_coords_per_param = 24;
  double gc_tol = 1e-4;
  gc->add_option("--file", gc_file, "MiniSol source file (a built-in five-line program when absent)");
  gc->add_option("--variant", gc_variant, "full, no_endpoints, prev_line or no_attn");
  gc->add_option("--seed", gc_seed, "Initialisation seed (falls back to VULCAN_SEED, then 1)");
  gc->add_option("--step", gc_opts.h, "Central difference step h");
  gc->add_option("--coords", gc_opts.max_coords_per_param, "Coordinates sampled per array, 0 = all");
  gc->add_option("--tolerance", gc_tol, "Largest accepted relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (gen->parsed()) {
    const auto seed = resolve_seed(gen_seed);
    if (gen_triplets > 0) {
      write_file_atomically(gen_out, corpus::write_triplets_jsonl(corpus::generate_similarity_triplets(gen_triplets, seed)));
      return 0;
    }
    corpus::CorpusSpec spec;
    spec.programs = gen_programs;
    spec.seed = seed;
    spec.size.min_lines = gen_min_lines;
    spec.size.max_lines = gen_max_lines;
    spec.label_noise = gen_noise;
    if (gen_min_lines < 1 || gen_max_lines < gen_min_lines) {
      throw Error(ErrorCategory::Usage, "need 1 <= --min-lines <= --max-lines");
    }
    corpus::save_corpus(gen_out, corpus::generate_corpus(spec));
    return 0;
  }

  if (ext->parsed()) {
    const auto program = frontend::SourceProgram::from_text(ext_file, read_file(ext_file));
    const auto ast = frontend::parse_source(program);
    if (ext_line < 0 || ext_line > ast.line_count()) throw Error(ErrorCategory::Usage, "--line out of range");
    const auto policy = ext_prev ? deps::EndpointPolicy::PreviousLine : deps::EndpointPolicy::MostRecentDefinition;
    for (int line = 1; line <= ast.line_count(); ++line) {
      if (ext_line != 0 && line != ext_line) continue;
      json tokens = json::array();
      for (const auto& tok : deps::line_tokens(ast, line)) {
        const auto res = deps::get_path(tok, line, ast, policy);
        json t{{"token", tok.text}, {"class", deps::to_string(tok.cls)}};
        t["endpoint"] = res.endpoint.line ? json(*res.endpoint.line) : json(nullptr);
        if (res.kind == deps::PathResult::Kind::Path) {
          t["path"] = deps::render_path(res.path);
          t["path_length"] = res.path.steps.size();
        }
        tokens.push_back(std::move(t));
      }
      std::cout << json{{"line", line}, {"tokens", tokens}}.dump() << "\n";
    }
    return 0;
  }

  if (tr->parsed()) {
    auto cfg = tr_flags.resolve();
    cfg.seed = resolve_seed(tr_seed);
    cfg.model = model::apply_variant(cfg.model, parse_variant(tr_variant));
    harness::validate(cfg);
    const auto data = load_dataset(tr_corpus);
    json log{{"config", cfg}, {"corpus_hash", data.hash}, {"epochs", json::array()}};
    auto result = harness::train(data, cfg, [&](const harness::EpochLog& e) {
      print_epoch(e);
      log["epochs"].push_back(epoch_json(e));
    });
    log["best_epoch"] = result.best_epoch;
    log["class_weights"] = result.class_weights;
    log["train_positive"] = result.train_positive;
    log["train_negative"] = result.train_negative;
    result.model.save(tr_out);
    write_file_atomically(tr_out + ".log.json", log.dump(2) + "\n");
    return 0;
  }

  if (ev->parsed()) {
    const auto split = parse_split(ev_split);
    auto m = model::Model::load(ev_model);
    const auto data = load_dataset(ev_corpus);
    const auto metrics = harness::evaluate(m, data, split);
    std::cout << json(metrics).dump(2) << "\n";
    if (!ev_out.empty()) {
      harness::ExperimentConfig cfg;
      cfg.model = m.config();
      harness::write_results(ev_out, cfg, data.hash,
                             {{std::string(model::to_string(m.config().variant())), 0, ev_split, metrics}});
    }
    return 0;
  }

  if (ab->parsed()) {
    const auto base = ab_flags.resolve();
    harness::validate(base);
    std::vector<model::Variant> variants;
    std::stringstream ss(ab_variants);
    for (std::string v; std::getline(ss, v, ',');) variants.push_back(parse_variant(v));
    const auto seeds = parse_seeds(ab_seeds);
    const auto data = load_dataset(ab_corpus);
    const auto rows = harness::run_ablation_suite(data, base, variants, seeds, [](const harness::AblationRow& r) {
      std::cerr << model::to_string(r.variant) << " seed " << r.seed << " val_f1 " << harness::format_ratio(r.val.f1)
                << " test_f1 " << harness::format_ratio(r.test.f1) << "\n";
    });
    harness::write_results(ab_out, base, data.hash, harness::result_rows(rows));
    for (const auto v : variants) {
      std::cout << model::to_string(v) << " median_val_f1 " << harness::median_val_f1(rows, v) << "\n";
    }
    return 0;
  }

  if (bl->parsed()) {
    std::vector<harness::FeatureMode> modes;
    std::stringstream ss(bl_modes);
    for (std::string name; std::getline(ss, name, ',');) {
      const auto m = harness::feature_mode_from_string(name);
      if (!m) throw Error(ErrorCategory::Usage, "unknown feature mode: " + name);
      modes.push_back(*m);
    }
    if (bl_cfg.iterations < 1 || !(bl_cfg.lr > 0.0) || bl_cfg.subsample_ratio < 0.0 ||
        (bl_cfg.class_weight_rule != "inverse_frequency" && bl_cfg.class_weight_rule != "none")) {
      throw Error(ErrorCategory::Usage, "bad baseline settings");
    }
    const auto seeds = parse_seeds(bl_seeds);
    const auto data = load_dataset(bl_corpus);
    std::vector<harness::ResultRow> rows;
    for (const auto mode : modes) {
      std::vector<double> f1;
      for (const auto seed : seeds) {
        auto c = bl_cfg;
        c.seed = seed;
        const auto m = harness::train_bow(data, mode, c);
        const std::string name(harness::to_string(mode));
        rows.push_back({name, seed, "val", harness::evaluate_bow(m, data, corpus::Split::Val)});
        rows.push_back({name, seed, "test", harness::evaluate_bow(m, data, corpus::Split::Test)});
        f1.push_back(harness::f1_or_zero(rows[rows.size() - 2].metrics));
      }
      std::cout << harness::to_string(mode) << " median_val_f1 " << harness::median(f1) << "\n";
    }
    harness::ExperimentConfig stamp;
    stamp.lr = bl_cfg.lr;
    stamp.subsample_ratio = bl_cfg.subsample_ratio;
    stamp.class_weight_rule = bl_cfg.class_weight_rule;
    auto summary = harness::results_summary(stamp, data.hash, rows);
    summary["bow_iterations"] = bl_cfg.iterations;
    write_file_atomically(bl_out + ".csv", harness::results_csv(rows));
    write_file_atomically(bl_out + ".json", summary.dump(2) + "\n");
    return 0;
  }

  if (sim->parsed()) {
    auto m = model::Model::load(sim_model);
    const auto triplets = sim_triplets.empty()
                              ? corpus::generate_similarity_triplets(sim_count, resolve_seed(sim_seed))
                              : corpus::read_triplets_jsonl(read_file(sim_triplets));
    const auto r = harness::similarity_experiment(m, triplets);
    const auto csv = harness::similarity_csv(r);
    if (sim_out.empty()) {
      std::cout << csv;
    } else {
      write_file_atomically(sim_out, csv);
    }
    std::cerr << "pooled_std " << r.pooled_std() << "\n";
    return 0;
  }

  if (pr->parsed()) {
    auto m = model::Model::load(pr_model);
    const auto program = frontend::SourceProgram::from_text(pr_file, read_file(pr_file));
    const auto ast = frontend::parse_source(program);
    if (pr_line > ast.line_count()) throw Error(ErrorCategory::Usage, "--line beyond the end of the file");
    const double p = m.classify_line(m.represent_line(ast, pr_line));
    std::cout.precision(17);
    std::cout << p << "\n";
    return 0;
  }

  if (gc->parsed()) {
    if (!(gc_opts.h > 0.0) || !(gc_tol > 0.0)) throw Error(ErrorCategory::Usage, "--step and --tolerance must be positive");
    const auto program = gc_file.empty() ? frontend::SourceProgram::from_text("gradcheck", kGradcheckProgram)
                                         : frontend::SourceProgram::from_text(gc_file, read_file(gc_file));
    const auto ast = frontend::parse_source(program);
    model::ProgramLines lines{&ast, {}, {}};
    for (const auto& l : corpus::oracle_labels(ast)) {
      lines.lines.push_back(l.line);
      lines.labels.push_back(l.label);
    }
    if (lines.lines.empty()) throw Error(ErrorCategory::Data, "program has no assignment lines");
    const auto cfg = model::apply_variant(model::ModelConfig{}, parse_variant(gc_variant));
    model::Model m(cfg, deps::build_vocabs({&ast}, cfg.policy()), resolve_seed(gc_seed));
    std::vector<nn::Parameter*> trainable;
    for (auto* p : m.params().all()) {
      if (p->trainable) trainable.push_back(p);
    }
    const std::vector<model::ProgramLines> batch{lines};
    const auto report = nn::finite_diff_check(
        [&](nn::Graph& g) { return m.loss(g, batch, {1.0, 3.0}, nn::NormMode::Train, false); }, trainable, gc_opts);
    std::cout << json{{"max_rel_error", report.max_rel_error},
                      {"worst_param", report.worst_param},
                      {"worst_index", report.worst_index},
                      {"analytic", report.worst_analytic},
                      {"numeric", report.worst_numeric},
                      {"coords_checked", report.coords_checked},
                      {"pass", report.max_rel_error < gc_tol}}
                     .dump(2)
              << "\n";
    return report.max_rel_error < gc_tol ? 0 : 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.category()) {
      case ErrorCategory::Usage: return 1;
      case ErrorCategory::Data: return 2;
      case ErrorCategory::Internal: return 3;
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
