#include "vulcan/harness/experiment.hpp"

#include <cctype>
#include <sstream>

#include "vulcan/corpus/corpus_io.hpp"
#include "vulcan/io.hpp"

namespace vulcan::harness {

namespace {

nlohmann::json scalar(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return text;
  }
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  model::validate(cfg.model);
  const auto fail = [](const std::string& what) { throw Error(ErrorCategory::Usage, what); };
  if (!(cfg.lr > 0.0)) fail("lr must be positive");
  if (!(cfg.eps > 0.0)) fail("eps must be positive");
  if (cfg.batch_lines < 1) fail("batch_lines must be at least 1");
  if (cfg.max_epochs < 1) fail("max_epochs must be at least 1");
  if (cfg.patience < 1) fail("patience must be at least 1");
  if (cfg.subsample_ratio < 0.0) fail("subsample_ratio must not be negative");
  if (cfg.class_weight_rule != "inverse_frequency" && cfg.class_weight_rule != "none") {
    fail("class_weight_rule must be inverse_frequency or none");
  }
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
  j = nlohmann::json{{"lr", cfg.lr},
                     {"eps", cfg.eps},
                     {"batch_lines", cfg.batch_lines},
                     {"max_epochs", cfg.max_epochs},
                     {"patience", cfg.patience},
                     {"class_weight_rule", cfg.class_weight_rule},
                     {"subsample_ratio", cfg.subsample_ratio},
                     {"seed", cfg.seed},
                     {"model", cfg.model}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
  if (!j.is_object()) throw Error(ErrorCategory::Usage, "experiment config must be an object");
  nlohmann::json model_json = cfg.model;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "lr") cfg.lr = value.get<double>();
      else if (key == "eps") cfg.eps = value.get<double>();
      else if (key == "batch_lines") cfg.batch_lines = value.get<int>();
      else if (key == "max_epochs") cfg.max_epochs = value.get<int>();
      else if (key == "patience") cfg.patience = value.get<int>();
      else if (key == "class_weight_rule") cfg.class_weight_rule = value.get<std::string>();
      else if (key == "subsample_ratio") cfg.subsample_ratio = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "model") model_json.update(value);
      else model_json[key] = value;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::Usage, std::string("bad config value: ") + e.what());
  }
  cfg.model = model_json.get<model::ModelConfig>();
}

void apply_experiment_config_text(std::string_view text, ExperimentConfig& cfg) {
  const std::string body = trim(text);
  nlohmann::json j = nlohmann::json::object();
  if (!body.empty() && body.front() == '{') {
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCategory::Usage, std::string("config is not valid JSON: ") + e.what());
    }
  } else {
    std::istringstream in{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      const auto hash = line.find('#');
      const std::string content = trim(std::string_view(line).substr(0, hash));
      if (content.empty()) continue;
      const auto eq = content.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorCategory::Usage, "config line " + std::to_string(n) + ": expected key=value");
      }
      j[trim(std::string_view(content).substr(0, eq))] = scalar(trim(std::string_view(content).substr(eq + 1)));
    }
  }
  from_json(j, cfg);
  validate(cfg);
}

std::vector<std::size_t> Dataset::indices(corpus::Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == split) out.push_back(i);
  }
  return out;
}

Dataset make_dataset(corpus::Corpus records) {
  Dataset d;
  d.hash = fnv1a_hex(corpus::write_corpus_jsonl(records));
  for (const auto& r : records) d.asts.push_back(frontend::parse_source(r.program));
  d.records = std::move(records);
  return d;
}

}  // namespace vulcan::harness
