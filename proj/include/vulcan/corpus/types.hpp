#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulcan/error.hpp"
#include "vulcan/frontend/source.hpp"

namespace vulcan::corpus {

using frontend::SourceProgram;

enum class VulnClass { DeadAfterCall, UncheckedDiv, LoopOverflow };

std::string_view to_string(VulnClass v);
std::optional<VulnClass> vuln_class_from_string(std::string_view name);

struct LabeledLine {
  int line = 0;
  int label = 0;  // 1 iff vuln is set
  std::optional<VulnClass> vuln;
  friend bool operator==(const LabeledLine&, const LabeledLine&) = default;
};

enum class Split { Train, Val, Test };

std::string_view to_string(Split s);
std::optional<Split> split_from_string(std::string_view name);

struct CorpusRecord {
  SourceProgram program;
  std::vector<LabeledLine> labels;
  Split split = Split::Train;
  friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

using Corpus = std::vector<CorpusRecord>;

struct SimilarityTriplet {
  SourceProgram base;
  SourceProgram mod_dep;
  SourceProgram no_mod_dep;
  // The line of interest has the same text in all three programs but sits
  // on a different physical line when filler or loop lines differ.
  int base_line = 0;
  int mod_dep_line = 0;
  int no_mod_dep_line = 0;
  friend bool operator==(const SimilarityTriplet&, const SimilarityTriplet&) = default;
};

}  // namespace vulcan::corpus
