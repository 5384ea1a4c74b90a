#pragma once

#include <string>

namespace vulcan {

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// readers never observe a partial file.
void write_file_atomically(const std::string& path, const std::string& bytes);

/// Whole file as bytes; throws a Data error if it cannot be opened.
std::string read_file(const std::string& path);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace vulcan
