#pragma once

#include <cstdint>
#include <vector>

#include "vulcan/corpus/types.hpp"

namespace vulcan::corpus {

/// `count` triplets built around a line of interest that reads a variable
/// updated inside a loop. MOD-DEP renames the other variables, swaps the
/// operators on the dependence chain and changes the filler code;
/// NO-MOD-DEP only drops the loop around the update. The line of interest
/// keeps the same text in all three.
std::vector<SimilarityTriplet> generate_similarity_triplets(int count, std::uint64_t seed);

}  // namespace vulcan::corpus
