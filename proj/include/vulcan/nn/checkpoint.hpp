#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vulcan/nn/tensor.hpp"

namespace vulcan::nn {

class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& what) : Error(ErrorCategory::Data, "checkpoint: " + what) {}
};

/// "VULCAN1", then per parameter: u32 name length, name bytes, u32 rank,
/// u64 per dimension, little-endian f64 values.
std::string encode_checkpoint(const std::vector<const Parameter*>& params);
std::vector<std::pair<std::string, Tensor>> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params);
std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path);

/// Copies every record into the same-named parameter. Names and shapes must
/// match the store exactly.
void load_checkpoint(const std::string& path, ParameterStore& store);
void assign_checkpoint(const std::vector<std::pair<std::string, Tensor>>& records, ParameterStore& store);

}  // namespace vulcan::nn
