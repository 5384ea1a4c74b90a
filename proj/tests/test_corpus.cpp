#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "vulcan/corpus/corpus_io.hpp"
#include "vulcan/corpus/generator.hpp"
#include "vulcan/corpus/oracle.hpp"
#include "vulcan/corpus/rename.hpp"
#include "vulcan/corpus/similarity.hpp"
#include "vulcan/deps/dependence.hpp"
#include "vulcan/frontend/ast.hpp"
#include "oracles.hpp"

using namespace vulcan::corpus;
using vulcan::frontend::NodeKind;
using vulcan::frontend::parse_source;
namespace deps = vulcan::deps;

namespace {

SourceProgram program(const std::string& text) { return SourceProgram::from_text("t", text); }

std::optional<VulnClass> label_at(const std::vector<LabeledLine>& labels, int line) {
  for (const auto& l : labels) {
    if (l.line == line) return l.vuln;
  }
  FAIL("no label for line " << line);
  return std::nullopt;
}

}  // namespace

TEST_CASE("generation is a pure function of the seed") {
  const auto a = generate_program(7);
  const auto b = generate_program(7);
  const auto c = generate_program(8);
  CHECK(a.program == b.program);
  CHECK(a.labels == b.labels);
  CHECK_FALSE(a.program.source == c.program.source);
}

TEST_CASE("generated programs round-trip and statements sit on their recorded lines") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto g = generate_program(seed);
    CAPTURE(seed);
    const auto ast = parse_source(g.program);
    REQUIRE(vulcan::frontend::pretty_print(ast) == g.program.source);
    CHECK(g.program.line_count() >= 20);
    CHECK(g.program.line_count() <= 45);
    for (const auto& s : g.statements) {
      const auto starts = ast.nodes_starting_on(s.line);
      const auto it = std::find_if(starts.begin(), starts.end(), [&](auto id) { return ast.node(id).kind == s.kind; });
      REQUIRE_MESSAGE(it != starts.end(), "line " << s.line);
      if (s.kind == NodeKind::Assign || s.kind == NodeKind::VarDecl) {
        CHECK(ast.written_name(*it) == s.writes.front());
      }
      if (s.kind == NodeKind::FuncDecl) CHECK(ast.node(*it).name == s.function);
    }
    for (const auto& l : g.labels) CHECK(vulcan::frontend::assignments_on_line(ast, l.line).has_value());
  }
}

TEST_CASE("end-points agree with a backward scan over the generator's statements") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1000; seed < 1300; ++seed) {
    const auto g = generate_program(seed);
    const auto ast = parse_source(g.program);
    for (int line = 1; line <= ast.line_count(); ++line) {
      for (const auto& tok : deps::line_tokens(ast, line)) {
        if (tok.cls != deps::TokenClass::Variable && tok.cls != deps::TokenClass::UserFunc) continue;
        const auto want = vulcan::testing::scan_endpoint(g.statements, tok, line);
        CAPTURE(seed);
        CAPTURE(line);
        CAPTURE(tok.text);
        CHECK(deps::resolve_endpoint(tok, line, ast).line == want);
        ++checked;
      }
    }
  }
  CHECK(checked > 3000);
}

TEST_CASE("generator labels match the structural oracle") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto g = generate_program(seed);
    CAPTURE(seed);
    CHECK(oracle_labels(g.program) == g.labels);
  }
}

TEST_CASE("a planted division gives exactly one positive") {
  SizeSpec spec;
  spec.min_lines = 8;
  spec.max_lines = 12;
  spec.plants = std::vector<VulnClass>{VulnClass::UncheckedDiv};
  const auto g = generate_program(1, spec);
  int positives = 0;
  for (const auto& l : g.labels) {
    if (l.label == 0) continue;
    ++positives;
    CHECK(l.vuln == VulnClass::UncheckedDiv);
    CHECK(g.program.lines[static_cast<std::size_t>(l.line - 1)].find(" / ") != std::string::npos);
  }
  CHECK(positives == 1);
}

TEST_CASE("each plant class is realised and agrees with the oracle") {
  for (VulnClass v : {VulnClass::DeadAfterCall, VulnClass::UncheckedDiv, VulnClass::LoopOverflow}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      SizeSpec spec;
      spec.plants = std::vector<VulnClass>{v};
      const auto g = generate_program(seed, spec);
      const auto labels = oracle_labels(g.program);
      CHECK(std::any_of(labels.begin(), labels.end(), [&](const LabeledLine& l) { return l.vuln == v; }));
    }
  }
}

TEST_CASE("unsatisfiable size spec gives up after retries") {
  SizeSpec spec;
  spec.min_lines = 3;
  spec.max_lines = 3;
  spec.plants = std::vector<VulnClass>{VulnClass::DeadAfterCall, VulnClass::UncheckedDiv, VulnClass::LoopOverflow};
  CHECK_THROWS_AS(generate_program(1, spec), GenerationRetryExceeded);
}

TEST_CASE("corpus positive rate, class mix and splits") {
  CorpusSpec spec;
  spec.programs = 200;
  spec.seed = 1;
  const Corpus corpus = generate_corpus(spec);
  REQUIRE(corpus.size() == 200);
  std::size_t lines = 0;
  std::map<VulnClass, int> by_class;
  int positives = 0;
  std::map<Split, int> splits;
  for (const auto& r : corpus) {
    ++splits[r.split];
    for (const auto& l : r.labels) {
      ++lines;
      if (l.label == 1) {
        ++positives;
        ++by_class[*l.vuln];
      }
    }
  }
  const double rate = static_cast<double>(positives) / static_cast<double>(lines);
  MESSAGE("positive rate " << rate << " over " << lines << " labelled lines");
  CHECK(rate >= 0.02);
  CHECK(rate <= 0.05);
  for (auto v : {VulnClass::DeadAfterCall, VulnClass::UncheckedDiv, VulnClass::LoopOverflow}) {
    const double share = static_cast<double>(by_class[v]) / positives;
    MESSAGE(to_string(v) << " share " << share);
    CHECK(share > 0.2);
    CHECK(share < 0.5);
  }
  CHECK(splits[Split::Train] == 140);
  CHECK(splits[Split::Val] == 30);
  CHECK(splits[Split::Test] == 30);
  CHECK(generate_corpus(spec) == corpus);
}

TEST_CASE("oracle: ext_call as the last statement marks nothing") {
  const auto p = program(
      "func f(a, b) {\n"
      "    var x = a + b\n"
      "    if x > 1 {\n"
      "        var s = ext_call(x)\n"
      "    }\n"
      "    var t = s * 2\n"
      "    ext_call(t)\n"
      "    return t\n"
      "}");
  for (const auto& l : oracle_labels(p)) CHECK(l.label == 0);
}

TEST_CASE("oracle: dead assignments follow ext_call in the same block only") {
  const auto p = program(
      "func f(a, b) {\n"
      "    var x = a + b\n"
      "    var s = ext_call(x)\n"
      "    var t = x * 2\n"
      "    if t > 1 {\n"
      "        t = t - 1\n"
      "    }\n"
      "    x = t - s\n"
      "    return x\n"
      "}");
  const auto labels = oracle_labels(p);
  CHECK(label_at(labels, 2) == std::nullopt);
  CHECK(label_at(labels, 3) == std::nullopt);
  CHECK(label_at(labels, 4) == VulnClass::DeadAfterCall);
  CHECK(label_at(labels, 6) == std::nullopt);
  CHECK(label_at(labels, 8) == VulnClass::DeadAfterCall);
}

TEST_CASE("oracle: division guards") {
  const auto p = program(
      "func f(a, b, c) {\n"
      "    var d = assert_nonzero(b)\n"
      "    var e = d\n"
      "    var x = a / e\n"
      "    var y = a / 4\n"
      "    var z = a / c\n"
      "    var w = a / 0\n"
      "    e = e + 1\n"
      "    var v = a / e\n"
      "    var u = a / (d + 1)\n"
      "    return x\n"
      "}");
  const auto labels = oracle_labels(p);
  CHECK(label_at(labels, 4) == std::nullopt);
  CHECK(label_at(labels, 5) == std::nullopt);
  CHECK(label_at(labels, 6) == VulnClass::UncheckedDiv);
  CHECK(label_at(labels, 7) == VulnClass::UncheckedDiv);
  CHECK(label_at(labels, 9) == VulnClass::UncheckedDiv);
  CHECK(label_at(labels, 10) == VulnClass::UncheckedDiv);
}

TEST_CASE("oracle: additions on loop-updated variables") {
  const auto p = program(
      "func f(a, n) {\n"
      "    var i = 0\n"
      "    var v = a\n"
      "    var g = a\n"
      "    while i < n {\n"
      "        v = v * 2\n"
      "        if v > 9 {\n"
      "            g = g - 1\n"
      "        }\n"
      "        i = i + 1\n"
      "    }\n"
      "    var x = v + 1\n"
      "    var y = v * 3\n"
      "    var z = g + 1\n"
      "    var q = a + v * 2\n"
      "    return x\n"
      "}");
  const auto labels = oracle_labels(p);
  CHECK(label_at(labels, 10) == std::nullopt);
  CHECK(label_at(labels, 12) == VulnClass::LoopOverflow);
  CHECK(label_at(labels, 13) == std::nullopt);
  CHECK(label_at(labels, 14) == std::nullopt);
  CHECK(label_at(labels, 15) == std::nullopt);
}

TEST_CASE("corpus JSONL round-trips") {
  CorpusSpec spec;
  spec.programs = 12;
  spec.seed = 3;
  const Corpus c = generate_corpus(spec);
  CHECK(read_corpus_jsonl(write_corpus_jsonl(c)) == c);
  CHECK(read_corpus_jsonl("").empty());
}

TEST_CASE("malformed corpus input names the offending line") {
  CorpusSpec spec;
  spec.programs = 3;
  const std::string good = write_corpus_jsonl(generate_corpus(spec));
  const std::string truncated = good.substr(0, good.size() - 20);
  try {
    read_corpus_jsonl(truncated);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }
  const std::string bad_split =
      R"({"id":"x","source":"func f(a) {\n    return a\n}","labels":[],"split":"dev"})";
  CHECK_THROWS_AS(read_corpus_jsonl(bad_split), FormatError);
  const std::string bad_line =
      R"({"id":"x","source":"func f(a) {\n    return a\n}","labels":[{"line":9,"label":0,"vuln":null}],"split":"train"})";
  CHECK_THROWS_AS(read_corpus_jsonl(bad_line), FormatError);
  const std::string bad_vuln =
      R"({"id":"x","source":"func f(a) {\n    var b = a\n    return b\n}","labels":[{"line":2,"label":1,"vuln":null}],"split":"train"})";
  CHECK_THROWS_AS(read_corpus_jsonl(bad_vuln), FormatError);
}

TEST_CASE("negative subsampling keeps every positive") {
  CorpusSpec spec;
  spec.programs = 60;
  const Corpus c = generate_corpus(spec);
  const Corpus s = subsample_negatives(c, 2.0, 9);
  int pos_before = 0;
  int pos_after = 0;
  int neg_after = 0;
  for (const auto& r : c) {
    for (const auto& l : r.labels) pos_before += l.label;
  }
  for (const auto& r : s) {
    for (const auto& l : r.labels) {
      pos_after += l.label;
      neg_after += 1 - l.label;
    }
  }
  CHECK(pos_after == pos_before);
  CHECK(neg_after == 2 * pos_before);
  CHECK(subsample_negatives(c, 2.0, 9) == s);
}

TEST_CASE("label noise flips with the requested probability") {
  CorpusSpec spec;
  spec.programs = 20;
  const Corpus c = generate_corpus(spec);
  Corpus none = c;
  apply_label_noise(none, 0.0, 1);
  CHECK(none == c);
  Corpus all = c;
  apply_label_noise(all, 1.0, 1);
  for (std::size_t r = 0; r < c.size(); ++r) {
    for (std::size_t i = 0; i < c[r].labels.size(); ++i) {
      CHECK(all[r].labels[i].label == 1 - c[r].labels[i].label);
      CHECK(all[r].labels[i].vuln.has_value() == (all[r].labels[i].label == 1));
    }
  }
}

TEST_CASE("alpha renaming keeps structure and labels") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = generate_program(seed);
    const auto renamed = alpha_rename(g.program, random_renaming(g.program, seed));
    CHECK(renamed.line_count() == g.program.line_count());
    CHECK(renamed.source != g.program.source);
    const auto a = parse_source(g.program);
    const auto b = parse_source(renamed);
    CHECK(a.size() == b.size());
    CHECK(oracle_labels(b) == g.labels);
  }
}

TEST_CASE("similarity triplets") {
  const auto triplets = generate_similarity_triplets(20, 5);
  REQUIRE(triplets.size() == 20);
  for (const auto& t : triplets) {
    for (const auto* p : {&t.base, &t.mod_dep, &t.no_mod_dep}) {
      CHECK(vulcan::frontend::pretty_print(parse_source(*p)) == p->source);
    }
    const auto& loi = t.base.lines[static_cast<std::size_t>(t.base_line - 1)];
    CHECK(t.mod_dep.lines[static_cast<std::size_t>(t.mod_dep_line - 1)] == loi);
    CHECK(t.no_mod_dep.lines[static_cast<std::size_t>(t.no_mod_dep_line - 1)] == loi);

    // Dropping the loop header and its closing brace, then dedenting the
    // body, turns BASE into NO-MOD-DEP.
    std::vector<std::string> expect;
    bool in_loop = false;
    for (const auto& l : t.base.lines) {
      if (l.rfind("    while ", 0) == 0) {
        in_loop = true;
        continue;
      }
      if (in_loop && l == "    }") {
        in_loop = false;
        continue;
      }
      expect.push_back(in_loop ? l.substr(4) : l);
    }
    CHECK(expect == t.no_mod_dep.lines);
    CHECK(t.mod_dep.source != t.base.source);
    CHECK(t.mod_dep.source.find("while") != std::string::npos);
  }
  CHECK(read_triplets_jsonl(write_triplets_jsonl(triplets)) == triplets);
}
