#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vulcan/corpus/types.hpp"
#include "vulcan/frontend/ast.hpp"

namespace vulcan::corpus {

struct SizeSpec {
  int min_lines = 20;
  int max_lines = 45;
  /// Vulnerabilities to plant; unset means a random draw of 0-3.
  std::optional<std::vector<VulnClass>> plants;
};

/// What the generator knows about each statement it wrote.
struct StatementRecord {
  int line = 0;
  frontend::NodeKind kind = frontend::NodeKind::Assign;  // FuncDecl for headers
  std::string function;
  std::vector<std::string> writes;  // assigned/declared name, or the parameters of a header
};

struct GeneratedProgram {
  SourceProgram program;
  std::vector<LabeledLine> labels;  // one per assignment line
  std::vector<StatementRecord> statements;
  std::vector<VulnClass> planted;
};

class GenerationRetryExceeded : public Error {
 public:
  explicit GenerationRetryExceeded(const std::string& why)
      : Error(ErrorCategory::Data, "program generation failed after 100 attempts: " + why) {}
};

/// Canonically formatted MiniSol program with planted vulnerabilities and
/// labels derived from the generator's own bookkeeping.
GeneratedProgram generate_program(std::uint64_t seed, const SizeSpec& spec = {}, const std::string& id = "p");

struct CorpusSpec {
  int programs = 200;
  std::uint64_t seed = 1;
  SizeSpec size;
  double label_noise = 0.0;
};

/// Programs "p0000", "p0001", ... with 70/15/15 splits by program.
Corpus generate_corpus(const CorpusSpec& spec);

/// Seeded 70/15/15 train/val/test assignment by program.
void assign_splits(Corpus& corpus, std::uint64_t seed);

/// Flips each label with probability p. A flipped-on line gets a uniformly
/// drawn vulnerability class.
void apply_label_noise(Corpus& corpus, double p, std::uint64_t seed);

/// Keeps every positive line and at most ratio × positives uniformly drawn
/// negatives; other lines are dropped from the label lists.
Corpus subsample_negatives(const Corpus& train, double ratio, std::uint64_t seed);

}  // namespace vulcan::corpus
