#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "vulcan/deps/dependence.hpp"
#include "vulcan/error.hpp"

namespace vulcan::model {

enum class Variant { Full, NoEndpoints, PrevLine, NoAttn };

std::string_view to_string(Variant v);
std::optional<Variant> variant_from_string(std::string_view name);

class ConfigConflict : public Error {
 public:
  explicit ConfigConflict(const std::string& what) : Error(ErrorCategory::Usage, "config conflict: " + what) {}
};

struct ModelConfig {
  int q = 256;  // context vector
  int t = 128;  // define / line vector
  int max_lines = 128;
  int max_tokens_per_line = static_cast<int>(deps::kMaxTokensPerLine);
  int max_path_len = static_cast<int>(deps::kMaxPathLength);
  int lstm_hidden = 64;  // per direction
  int step_embedding = 32;
  int path_dim = 128;  // per-path read-out
  int ffn_a_hidden = 512;
  int ffn_b_hidden = 512;
  int ffn_c_hidden = 64;
  int max_recursion_depth = 128;
  bool no_endpoints = false;
  bool prev_line = false;
  bool no_attn = false;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;

  deps::EndpointPolicy policy() const {
    return prev_line ? deps::EndpointPolicy::PreviousLine : deps::EndpointPolicy::MostRecentDefinition;
  }
  Variant variant() const;
};

/// Throws ConfigConflict for no_endpoints together with prev_line, and a
/// usage error for non-positive sizes or caps other than the extractor's.
void validate(const ModelConfig& cfg);

/// Clears the three ablation flags and sets the one `v` names.
ModelConfig apply_variant(ModelConfig cfg, Variant v);

void to_json(nlohmann::json& j, const ModelConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a usage error.
void from_json(const nlohmann::json& j, ModelConfig& cfg);

/// Overrides `cfg` from a config file body: a JSON object, or `key=value`
/// lines (blank lines and `#` comments allowed).
void apply_config_text(std::string_view text, ModelConfig& cfg);

}  // namespace vulcan::model
