#include "vulcan/model/config.hpp"

#include <set>
#include <sstream>

namespace vulcan::model {

using nlohmann::json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoEndpoints: return "no_endpoints";
    case Variant::PrevLine: return "prev_line";
    case Variant::NoAttn: return "no_attn";
  }
  return "?";
}

std::optional<Variant> variant_from_string(std::string_view name) {
  for (auto v : {Variant::Full, Variant::NoEndpoints, Variant::PrevLine, Variant::NoAttn}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

Variant ModelConfig::variant() const {
  if (no_endpoints) return Variant::NoEndpoints;
  if (prev_line) return Variant::PrevLine;
  if (no_attn) return Variant::NoAttn;
  return Variant::Full;
}

void validate(const ModelConfig& cfg) {
  if (cfg.no_endpoints && cfg.prev_line) throw ConfigConflict("no_endpoints and prev_line are mutually exclusive");
  for (int v : {cfg.q, cfg.t, cfg.max_lines, cfg.lstm_hidden, cfg.step_embedding, cfg.path_dim, cfg.ffn_a_hidden,
                cfg.ffn_b_hidden, cfg.ffn_c_hidden, cfg.max_recursion_depth}) {
    if (v <= 0) throw Error(ErrorCategory::Usage, "model sizes must be positive");
  }
  if (cfg.max_tokens_per_line != static_cast<int>(deps::kMaxTokensPerLine) ||
      cfg.max_path_len != static_cast<int>(deps::kMaxPathLength)) {
    throw ConfigConflict("max_tokens_per_line and max_path_len are fixed at 16 and 32");
  }
}

ModelConfig apply_variant(ModelConfig cfg, Variant v) {
  cfg.no_endpoints = v == Variant::NoEndpoints;
  cfg.prev_line = v == Variant::PrevLine;
  cfg.no_attn = v == Variant::NoAttn;
  return cfg;
}

namespace {

// Field table shared by JSON and key=value parsing.
struct IntField {
  const char* key;
  int ModelConfig::*member;
};
struct BoolField {
  const char* key;
  bool ModelConfig::*member;
};

constexpr IntField kIntFields[] = {
    {"q", &ModelConfig::q},
    {"t", &ModelConfig::t},
    {"max_lines", &ModelConfig::max_lines},
    {"max_tokens_per_line", &ModelConfig::max_tokens_per_line},
    {"max_path_len", &ModelConfig::max_path_len},
    {"lstm_hidden", &ModelConfig::lstm_hidden},
    {"step_embedding", &ModelConfig::step_embedding},
    {"path_dim", &ModelConfig::path_dim},
    {"ffn_a_hidden", &ModelConfig::ffn_a_hidden},
    {"ffn_b_hidden", &ModelConfig::ffn_b_hidden},
    {"ffn_c_hidden", &ModelConfig::ffn_c_hidden},
    {"max_recursion_depth", &ModelConfig::max_recursion_depth},
};
constexpr BoolField kBoolFields[] = {
    {"no_endpoints", &ModelConfig::no_endpoints},
    {"prev_line", &ModelConfig::prev_line},
    {"no_attn", &ModelConfig::no_attn},
};

bool set_field(ModelConfig& cfg, const std::string& key, const json& value) {
  for (const auto& f : kIntFields) {
    if (key == f.key) {
      if (!value.is_number_integer()) throw Error(ErrorCategory::Usage, "config key '" + key + "' needs an integer");
      cfg.*f.member = value.get<int>();
      return true;
    }
  }
  for (const auto& f : kBoolFields) {
    if (key == f.key) {
      if (!value.is_boolean()) throw Error(ErrorCategory::Usage, "config key '" + key + "' needs true/false");
      cfg.*f.member = value.get<bool>();
      return true;
    }
  }
  return false;
}

}  // namespace

void to_json(json& j, const ModelConfig& cfg) {
  j = json::object();
  for (const auto& f : kIntFields) j[f.key] = cfg.*f.member;
  for (const auto& f : kBoolFields) j[f.key] = cfg.*f.member;
}

void from_json(const json& j, ModelConfig& cfg) {
  if (!j.is_object()) throw Error(ErrorCategory::Usage, "model config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!set_field(cfg, key, value)) throw Error(ErrorCategory::Usage, "unknown model config key '" + key + "'");
  }
}

void apply_config_text(std::string_view text, ModelConfig& cfg) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCategory::Usage, std::string("config file: ") + e.what());
    }
    from_json(j, cfg);
    return;
  }
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCategory::Usage, "config line " + std::to_string(n) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto l = s.find_first_not_of(" \t\r");
      const auto r = s.find_last_not_of(" \t\r");
      return l == std::string::npos ? std::string() : s.substr(l, r - l + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    json value;
    if (raw == "true" || raw == "false") {
      value = raw == "true";
    } else {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        value = v;
      } catch (const std::exception&) {
        throw Error(ErrorCategory::Usage, "config line " + std::to_string(n) + ": bad value '" + raw + "'");
      }
    }
    if (!set_field(cfg, key, value)) throw Error(ErrorCategory::Usage, "unknown model config key '" + key + "'");
  }
}

}  // namespace vulcan::model
