#pragma once

#include <array>
#include <string>
#include <vector>

#include "vulcan/corpus/types.hpp"
#include "vulcan/model/model.hpp"

namespace vulcan::harness {

struct DistanceSummary {
  std::string pair;  // "BASE-MOD-DEP", "BASE-NO-MOD-DEP", "MOD-DEP-NO-MOD-DEP"
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::size_t n = 0;
};

struct SimilarityResult {
  std::vector<double> base_mod;
  std::vector<double> base_nomod;
  std::vector<double> mod_nomod;
  std::array<DistanceSummary, 3> table;

  /// sqrt((s1^2 + s2^2) / 2) over the two NO-MOD-DEP pairs.
  double pooled_std() const;
};

DistanceSummary summarize(std::string pair, const std::vector<double>& distances);

/// L2 distances between the representations of the line of interest in each
/// triplet's three programs, under fixed weights.
SimilarityResult similarity_experiment(model::Model& m, const std::vector<corpus::SimilarityTriplet>& triplets);

}  // namespace vulcan::harness
