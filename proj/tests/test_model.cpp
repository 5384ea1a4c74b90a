#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <utility>

#include "fixtures.hpp"
#include "model_fixtures.hpp"
#include "vulcan/corpus/generator.hpp"
#include "vulcan/corpus/rename.hpp"
#include "vulcan/frontend/ast.hpp"
#include "vulcan/io.hpp"
#include "vulcan/model/model.hpp"
#include "vulcan/nn/checkpoint.hpp"
#include "vulcan/nn/gradcheck.hpp"
#include "vulcan/nn/loss.hpp"

using namespace vulcan;
using namespace vulcan::model;
using nn::Tensor;
using namespace vulcan::testing;

namespace {

// Independent forward pass for a line without right-hand-side tokens: every
// slot is zero, so only biases and normalisation statistics matter.
std::vector<double> zero_slot_line(const nn::ParameterStore& ps, const ModelConfig& cfg) {
  const auto layer = [&](const std::string& prefix, const std::vector<double>& in, std::size_t in_offset) {
    const Tensor& w1 = ps.get(prefix + ".w1").value;
    const Tensor& gamma = ps.get(prefix + ".bn.gamma").value;
    const Tensor& beta = ps.get(prefix + ".bn.beta").value;
    const Tensor& mean = ps.get(prefix + ".bn.running_mean").value;
    const Tensor& var = ps.get(prefix + ".bn.running_var").value;
    const Tensor& w2 = ps.get(prefix + ".w2").value;
    const Tensor& b2 = ps.get(prefix + ".b2").value;
    const std::size_t hidden = w1.shape[1];
    std::vector<double> h(hidden, 0.0);
    for (std::size_t j = 0; j < hidden; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < in.size(); ++k) s += in[k] * w1.at(in_offset + k, j);
      const double n = gamma.data[j] * (s - mean.data[j]) / std::sqrt(var.data[j] + 1e-5) + beta.data[j];
      h[j] = std::max(0.0, n);
    }
    std::vector<double> out(w2.shape[1]);
    for (std::size_t j = 0; j < out.size(); ++j) {
      double s = b2.data[j];
      for (std::size_t k = 0; k < hidden; ++k) s += h[k] * w2.at(k, j);
      out[j] = std::tanh(s);
    }
    return out;
  };
  const auto ctx = layer("ffn_a", {}, 0);
  return layer("ffn_b", ctx, cfg.no_endpoints ? 0 : static_cast<std::size_t>(cfg.max_tokens_per_line * cfg.t));
}

}  // namespace

TEST_CASE("division line recurses into the definitions of its operands") {
  const auto ast = frontend::parse_source(testing::kLoopDivision);
  Model m(ModelConfig{}, vocab_of(ast), 3);

  const auto plan = plan_program(ast, {testing::kDivLine}, m.vocab(), m.config());
  const auto& target = plan.nodes.at(static_cast<std::size_t>(plan.node_of_line.at(testing::kDivLine)));
  std::set<int> direct;
  for (int d : target.deps) {
    if (d >= 0) direct.insert(plan.nodes[static_cast<std::size_t>(d)].line);
  }
  CHECK(direct == std::set<int>{testing::kRDefLine, testing::kYDefLine});

  MemoTable memo;
  const Tensor rep = m.represent_line(ast, testing::kDivLine, memo);
  CHECK(rep.size() == 128);
  CHECK(rep.all_finite());
  // y and r lead back to the parameters declared in the header.
  const std::set<int> visited(memo.visited.begin(), memo.visited.end());
  CHECK(visited == std::set<int>{testing::kHeaderLine, testing::kRDefLine, testing::kYDefLine, testing::kDivLine});
  CHECK(memo.visited.back() == testing::kDivLine);
  CHECK(memo.in_progress.empty());

  // r's context path walks through the loop and the division.
  const auto tokens = deps::line_tokens(ast, testing::kDivLine);
  const auto r = std::find_if(tokens.begin(), tokens.end(), [](const auto& t) { return t.text == "r"; });
  REQUIRE(r != tokens.end());
  const auto path = deps::get_path(*r, testing::kDivLine, ast);
  CHECK(contains_kind(path.path, frontend::NodeKind::Loop));
  CHECK(contains_kind(path.path, frontend::NodeKind::BinOp));
}

TEST_CASE("dimension contract") {
  const auto ast = frontend::parse_source(testing::kLoopDivision);
  Model m(ModelConfig{}, vocab_of(ast), 1);
  for (int line = 1; line <= ast.line_count(); ++line) CHECK(m.represent_line(ast, line).size() == 128);
  CHECK(m.stage2_context({}).size() == 256);
  const auto slots = plan_slots(ast, testing::kDivLine, m.vocab(), m.config());
  std::vector<std::optional<std::vector<int>>> paths;
  for (const auto& s : slots) paths.push_back(s.path);
  CHECK(m.stage2_context(paths).size() == 256);

  ModelConfig small;
  small.q = 12;
  small.t = 7;
  Model s(small, vocab_of(ast), 1);
  CHECK(s.represent_line(ast, testing::kDivLine).size() == 7);
  CHECK(s.stage2_context(paths).size() == 12);
}

TEST_CASE("line without tokens is the feed-forward image of all-zero slots") {
  const auto ast = frontend::parse_source("func g() {\n    var x = 5\n    return x\n}");
  CHECK(deps::line_tokens(ast, 2).empty());
  for (const Variant v : {Variant::Full, Variant::NoEndpoints}) {
    const ModelConfig cfg = apply_variant(ModelConfig{}, v);
    Model m(cfg, vocab_of(ast), 11);
    perturb(m.params(), 5);
    const Tensor rep = m.represent_line(ast, 2);
    const auto expected = zero_slot_line(m.params(), cfg);
    REQUIRE(rep.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(rep.data[i] == doctest::Approx(expected[i]).epsilon(1e-12));

    Model again(cfg, vocab_of(ast), 11);
    perturb(again.params(), 5);
    CHECK(again.represent_line(ast, 2) == rep);
  }
}

TEST_CASE("memoisation does not change representations") {
  const auto progs = make_programs(50, 900);
  Model m(ModelConfig{}, progs.vocab, 2);
  perturb(m.params(), 9);
  for (std::size_t i = 0; i < progs.asts.size(); ++i) {
    MemoTable shared;
    for (int line : progs.lines(i)) {
      MemoTable off;
      off.enabled = false;
      const Tensor a = m.represent_line(progs.asts[i], line, shared);
      const Tensor b = m.represent_line(progs.asts[i], line, off);
      CHECK(a == b);
      CHECK(off.reps.empty());
    }
    for (const auto& [line, rep] : shared.reps) CHECK(shared.in_progress.count(line) == 0);
  }
}

TEST_CASE("batched inference equals the recursive definition bitwise") {
  const auto progs = make_programs(20, 1300);
  Model m(ModelConfig{}, progs.vocab, 4);
  perturb(m.params(), 21);
  std::vector<ProgramLines> batch;
  for (std::size_t i = 0; i < progs.asts.size(); ++i) batch.push_back({&progs.asts[i], progs.lines(i), {}});
  const auto out = m.predict(batch);

  nn::Graph g(false);
  const auto fw = m.forward(g, batch, nn::NormMode::Eval, false);
  std::size_t row = 0;
  for (std::size_t i = 0; i < progs.asts.size(); ++i) {
    CHECK(out[i].lines == progs.lines(i));
    MemoTable memo;
    for (std::size_t j = 0; j < out[i].lines.size(); ++j, ++row) {
      const Tensor rep = m.represent_line(progs.asts[i], out[i].lines[j], memo);
      const Tensor& reps = g.value(fw.reps);
      CHECK(std::equal(rep.data.begin(), rep.data.end(), reps.row(row)));
      CHECK(out[i].probabilities[j] == m.classify_line(rep));
    }
  }
}

TEST_CASE("alpha renaming leaves representations and probabilities unchanged") {
  const auto progs = make_programs(50, 4100);
  Model m(ModelConfig{}, progs.vocab, 6);
  perturb(m.params(), 8);
  for (std::size_t i = 0; i < progs.asts.size(); ++i) {
    const auto& src = progs.generated[i].program;
    const auto renamed = frontend::parse_source(corpus::alpha_rename(src, corpus::random_renaming(src, 77 + i)));
    CHECK(frontend::pretty_print(renamed) != frontend::pretty_print(progs.asts[i]));
    MemoTable a;
    MemoTable b;
    for (int line : progs.lines(i)) {
      const Tensor ra = m.represent_line(progs.asts[i], line, a);
      const Tensor rb = m.represent_line(renamed, line, b);
      CHECK(ra == rb);
      CHECK(m.classify_line(ra) == m.classify_line(rb));
    }
  }
}

TEST_CASE("context slots are positional") {
  const auto ast = frontend::parse_source("func f(a, b) {\n    var c = a + b * 2\n    var d = c - b\n}");
  Model m(ModelConfig{}, vocab_of(ast), 12);
  const auto slots = plan_slots(ast, 3, m.vocab(), m.config());
  REQUIRE(slots.size() == 3);
  REQUIRE(slots[0].path);
  REQUIRE(slots[2].path);
  CHECK(*slots[0].path != *slots[2].path);
  const Tensor ab = m.stage2_context({slots[0].path, slots[2].path});
  const Tensor ba = m.stage2_context({slots[2].path, slots[0].path});
  CHECK(ab != ba);
  CHECK(m.stage2_context({slots[0].path, std::nullopt}) == m.stage2_context({slots[0].path}));
}

TEST_CASE("classification probability") {
  const auto ast = frontend::parse_source(testing::kLoopDivision);
  Model m(ModelConfig{}, vocab_of(ast), 13);
  perturb(m.params(), 4);
  const Tensor rep = m.represent_line(ast, testing::kDivLine);
  const double p = m.classify_line(rep);
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
  const double logits[2] = {0.7, 0.7};
  CHECK(nn::positive_probability(logits) == doctest::Approx(0.5).epsilon(1e-15));

  // Equal last-layer columns give equal logits.
  auto& w2 = m.params().get("ffn_c.w2").value;
  for (std::size_t k = 0; k < w2.shape[0]; ++k) w2.at(k, 1) = w2.at(k, 0);
  auto& b2 = m.params().get("ffn_c.b2").value;
  b2.data[1] = b2.data[0];
  CHECK(m.classify_line(rep) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("previous-line variant on the first line leaves every token undefined") {
  const auto ast = frontend::parse_source("func f(a) { return a + max(a, 2) }");
  ModelConfig cfg = apply_variant(ModelConfig{}, Variant::PrevLine);
  const auto vocab = vocab_of(ast);
  const auto slots = plan_slots(ast, 1, vocab, cfg);
  REQUIRE(slots.size() == 4);
  for (const auto& s : slots) {
    CHECK(s.define != TokenSlot::Define::Line);
    CHECK_FALSE(s.path);
  }
  CHECK(slots[0].define == TokenSlot::Define::Undefined);
  CHECK(slots[1].define == TokenSlot::Define::OneHot);

  // Elsewhere every variable token points at the preceding statement line.
  const auto prog = frontend::parse_source(testing::kLoopDivision);
  for (const auto& s : plan_slots(prog, testing::kDivLine, vocab_of(prog), cfg)) {
    if (s.define == TokenSlot::Define::OneHot) continue;
    CHECK(s.define == TokenSlot::Define::Line);
    CHECK(s.index == testing::kDivLine - 1);
  }
}

TEST_CASE("without end-points a line ignores the lines it depends on") {
  const std::string changed =
      "func foo(y, r, n) {\n"
      "    while r < n {\n"
      "        r = r - 7\n"
      "    }\n"
      "    y = max(y, 3)\n"
      "    x = y / r\n"
      "    return x\n"
      "}";
  const auto a = frontend::parse_source(testing::kLoopDivision);
  const auto b = frontend::parse_source(changed);
  const auto vocab = deps::build_vocabs({&a, &b});

  Model ablated(apply_variant(ModelConfig{}, Variant::NoEndpoints), vocab, 14);
  perturb(ablated.params(), 2);
  MemoTable memo;
  const Tensor ra = ablated.represent_line(a, testing::kDivLine, memo);
  CHECK(memo.visited == std::vector<int>{testing::kDivLine});
  CHECK(ra == ablated.represent_line(b, testing::kDivLine));

  Model full(ModelConfig{}, vocab, 14);
  perturb(full.params(), 2);
  CHECK(full.represent_line(a, testing::kDivLine) != full.represent_line(b, testing::kDivLine));
}

TEST_CASE("ablations remove weight arrays") {
  const auto ast = frontend::parse_source(testing::kLoopDivision);
  const auto vocab = vocab_of(ast);
  const auto names = [&](Variant v) {
    auto n = init_params(apply_variant(ModelConfig{}, v), vocab, 0).names();
    return std::set<std::string>(n.begin(), n.end());
  };
  const auto full = names(Variant::Full);
  CHECK(full.count("define.op_embedding") == 1);
  CHECK(full.count("define.undefined") == 1);
  CHECK(full.count("context.readout.w") == 1);

  const auto no_ep = removed_parameters(Variant::NoEndpoints, vocab);
  CHECK(no_ep == std::vector<std::string>{"define.op_embedding", "define.undefined"});
  CHECK(init_params(apply_variant(ModelConfig{}, Variant::NoEndpoints), vocab, 0).get("ffn_b.w1").value.shape ==
        std::vector<std::size_t>{256, 512});
  CHECK(init_params(ModelConfig{}, vocab, 0).get("ffn_b.w1").value.shape == std::vector<std::size_t>{16 * 128 + 256, 512});

  const auto no_attn = removed_parameters(Variant::NoAttn, vocab);
  CHECK(no_attn == std::vector<std::string>{"context.readout.b", "context.readout.w"});
  CHECK(names(Variant::NoAttn).count("context.final_state.w") == 1);
  CHECK(full != names(Variant::NoAttn));

  // The previous-line ablation changes where paths end, not which arrays exist.
  CHECK(removed_parameters(Variant::PrevLine, vocab).empty());

  ModelConfig bad;
  bad.no_endpoints = true;
  bad.prev_line = true;
  CHECK_THROWS_AS(init_params(bad, vocab, 0), ConfigConflict);
}

TEST_CASE("initialisation") {
  const auto ast = frontend::parse_source(testing::kLoopDivision);
  const auto vocab = vocab_of(ast);
  const auto a = init_params(ModelConfig{}, vocab, 5);
  const auto b = init_params(ModelConfig{}, vocab, 5);
  const auto c = init_params(ModelConfig{}, vocab, 6);
  CHECK(nn::encode_checkpoint(a.all()) == nn::encode_checkpoint(b.all()));
  CHECK(nn::encode_checkpoint(a.all()) != nn::encode_checkpoint(c.all()));

  const auto& w = a.get("ffn_a.w1").value;
  const double limit = std::sqrt(6.0 / (2048.0 + 512.0));
  CHECK(*std::max_element(w.data.begin(), w.data.end()) <= limit);
  CHECK(*std::min_element(w.data.begin(), w.data.end()) >= -limit);
  const auto& lb = a.get("lstm.fwd.b").value;
  for (std::size_t j = 0; j < 256; ++j) CHECK(lb.data[j] == (j >= 64 && j < 128 ? 1.0 : 0.0));
  CHECK_FALSE(a.get("define.undefined").trainable);
  CHECK_FALSE(a.get("ffn_a.bn.running_mean").trainable);
  CHECK(a.get("ffn_b.bn.gamma").value == Tensor({512}, 1.0));
  CHECK(a.get("path.embedding").value.shape[0] == static_cast<std::size_t>(vocab.node_kind_size()));
  CHECK(a.get("define.op_embedding").value.shape ==
        std::vector<std::size_t>{static_cast<std::size_t>(vocab.define_size()), 128});
}

TEST_CASE("per-program forward pass") {
  const auto none = frontend::parse_source("func f() {\n    ext_call(1)\n    return 0\n}");
  Model m0(ModelConfig{}, vocab_of(none), 1);
  const auto empty = m0.forward_program(none, {}, {}, {1.0, 1.0});
  CHECK(empty.lines.empty());
  CHECK(empty.loss == 0.0);

  const auto one = frontend::parse_source("func f() {\n    x = 1\n}");
  Model m(ModelConfig{}, vocab_of(one), 2);
  perturb(m.params(), 3);
  const double p = m.classify_line(m.represent_line(one, 2));
  const auto out = m.forward_program(one, {2}, {0}, {1.0, 4.0}, nn::NormMode::Eval);
  REQUIRE(out.probabilities.size() == 1);
  CHECK(out.probabilities[0] == doctest::Approx(p).epsilon(1e-14));
  CHECK(out.loss == doctest::Approx(-std::log(1.0 - p)).epsilon(1e-12));
  double grad_norm = 0.0;
  for (const auto* prm : m.params().all()) {
    for (double v : prm->grad.data) grad_norm += v * v;
  }
  CHECK(grad_norm > 0.0);
}

TEST_CASE("composed model gradient matches finite differences") {
  REQUIRE(frontend::parse_source(kFiveLines).line_count() == 5);
  const auto check = [&](const ModelConfig& base, std::size_t coords, nn::NormMode mode) {
    for (const Variant v : {Variant::Full, Variant::NoEndpoints, Variant::PrevLine, Variant::NoAttn}) {
      CAPTURE(to_string(v));
      const auto report = five_line_gradcheck(apply_variant(base, v), coords, mode);
      CAPTURE(report.worst_param);
      CAPTURE(report.worst_analytic);
      CAPTURE(report.worst_numeric);
      CHECK(report.max_rel_error < 1e-4);
      CHECK(report.coords_checked > 400);
    }
  };
  SUBCASE("default dimensions, sampled coordinates") { check(ModelConfig{}, 24, nn::NormMode::Train); }
  SUBCASE("small dimensions, every coordinate") {
    check(tiny_config(), 0, nn::NormMode::Train);
    check(tiny_config(), 0, nn::NormMode::Eval);
  }
}

TEST_CASE("recursion depth stays within the line count") {
  const auto progs = make_programs(100, 7000);
  Model m(ModelConfig{}, progs.vocab, 1);
  for (std::size_t i = 0; i < progs.asts.size(); ++i) {
    const auto plan = plan_program(progs.asts[i], progs.lines(i), progs.vocab, m.config());
    CHECK(plan.max_depth >= 1);
    CHECK(plan.max_depth <= progs.asts[i].line_count());
    for (const auto& node : plan.nodes) {
      for (int d : node.deps) {
        if (d >= 0) CHECK(plan.nodes[static_cast<std::size_t>(d)].level < node.level);
      }
    }
  }
  // A chain of dependent lines recurses once per line.
  std::string src = "func f(a) {\n";
  for (int i = 0; i < 40; ++i) src += "    a = a + 1\n";
  src += "}";
  const auto chain = frontend::parse_source(src);
  MemoTable memo;
  m.represent_line(chain, 41, memo);
  CHECK(memo.max_depth == 41);

  ModelConfig shallow;
  shallow.max_recursion_depth = 10;
  Model s(shallow, deps::build_vocabs({&chain}), 1);
  CHECK_THROWS_AS(s.represent_line(chain, 41), RecursionDepthExceeded);
}

TEST_CASE("caps on paths, slots and lines") {
  const auto progs = make_programs(500, 12000);
  const ModelConfig cfg;
  for (std::size_t i = 0; i < progs.asts.size(); ++i) {
    const auto& ast = progs.asts[i];
    for (int line = 1; line <= ast.line_count(); ++line) {
      const auto slots = plan_slots(ast, line, progs.vocab, cfg);
      CHECK(slots.size() <= 16);
      for (const auto& s : slots) {
        if (s.path) CHECK(s.path->size() <= 32);
      }
    }
  }

  std::string src = "func f(a) {\n";
  for (int i = 0; i < 140; ++i) src += "    a = a * 3\n";
  src += "}";
  const auto big = frontend::parse_source(src);
  Model m(cfg, deps::build_vocabs({&big}), 1);
  std::vector<int> lines;
  for (int l = 2; l <= 141; ++l) lines.push_back(l);
  const auto out = m.predict({{&big, lines, {}}});
  CHECK(out[0].lines.size() == 127);
  CHECK(out[0].lines.back() == 128);
  CHECK_FALSE(representable(big, 129, cfg));
  CHECK_THROWS_AS(m.represent_line(big, 129), Error);
}

TEST_CASE("save and load") {
  const auto ast = frontend::parse_source(testing::kLoopDivision);
  const auto dir = std::filesystem::temp_directory_path() / "vulcan_test_model";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.ckpt").string();
  for (const Variant v : {Variant::Full, Variant::NoAttn, Variant::PrevLine}) {
    Model m(apply_variant(ModelConfig{}, v), vocab_of(ast), 8);
    perturb(m.params(), 6);
    m.save(path);
    Model back = Model::load(path);
    CHECK(back.config() == m.config());
    CHECK(back.vocab() == m.vocab());
    CHECK(nn::encode_checkpoint(std::as_const(back).params().all()) == nn::encode_checkpoint(std::as_const(m).params().all()));
    CHECK(back.represent_line(ast, testing::kDivLine) == m.represent_line(ast, testing::kDivLine));
    CHECK(read_file(path + ".meta.json").find(std::string("\"variant\": \"") + std::string(to_string(v))) !=
          std::string::npos);
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(Model::load(path), Error);
}
