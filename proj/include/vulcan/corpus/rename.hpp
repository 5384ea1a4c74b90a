#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vulcan/corpus/types.hpp"

namespace vulcan::corpus {

using Renaming = std::map<std::string, std::string>;

/// Rewrites identifier tokens through `mapping` (names not in the mapping
/// and builtin names are kept). Layout and line structure are unchanged.
SourceProgram alpha_rename(const SourceProgram& program, const Renaming& mapping);

/// Bijective renaming of every variable, parameter and user function name
/// to fresh names, drawn from `seed`.
Renaming random_renaming(const SourceProgram& program, std::uint64_t seed);

}  // namespace vulcan::corpus
