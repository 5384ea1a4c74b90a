#pragma once

#include <string>
#include <vector>

namespace vulcan::frontend {

/// A program as text. `lines` is `source` split on '\n', so joining it back
/// with '\n' reproduces the source exactly.
struct SourceProgram {
  std::string id;
  std::string source;
  std::vector<std::string> lines;

  static SourceProgram from_text(std::string id, std::string source);
  int line_count() const { return static_cast<int>(lines.size()); }
};

bool operator==(const SourceProgram& a, const SourceProgram& b);

}  // namespace vulcan::frontend
