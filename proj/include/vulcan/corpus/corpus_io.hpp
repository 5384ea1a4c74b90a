#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vulcan/corpus/types.hpp"

namespace vulcan::corpus {

/// Malformed corpus input; `line()` is the 1-based JSONL line.
class FormatError : public Error {
 public:
  FormatError(int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// One JSON object per line: {id, source, labels: [{line, label, vuln}], split}.
std::string write_corpus_jsonl(const Corpus& corpus);
Corpus read_corpus_jsonl(std::string_view text);

void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

/// {base, mod_dep, no_mod_dep, line_of_interest: {base, mod_dep, no_mod_dep}}.
std::string write_triplets_jsonl(const std::vector<SimilarityTriplet>& triplets);
std::vector<SimilarityTriplet> read_triplets_jsonl(std::string_view text);

/// Records of one split, in corpus order.
Corpus select_split(const Corpus& corpus, Split split);

}  // namespace vulcan::corpus
