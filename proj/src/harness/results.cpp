#include "vulcan/harness/results.hpp"

#include <cstdio>

#include "vulcan/io.hpp"

namespace vulcan::harness {

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    const Metrics& m = r.metrics;
    out += r.variant + "," + std::to_string(r.seed) + "," + r.split + "," + std::to_string(m.tp) + "," +
           std::to_string(m.fp) + "," + std::to_string(m.tn) + "," + std::to_string(m.fn) + "," +
           format_ratio(m.fpr) + "," + format_ratio(m.fnr) + "," + format_ratio(m.precision) + "," +
           format_ratio(m.recall) + "," + format_ratio(m.f1) + "\n";
  }
  return out;
}

std::vector<ResultRow> result_rows(const std::vector<AblationRow>& rows) {
  std::vector<ResultRow> out;
  for (const auto& r : rows) {
    const std::string v(model::to_string(r.variant));
    out.push_back({v, r.seed, "val", r.val});
    out.push_back({v, r.seed, "test", r.test});
  }
  return out;
}

nlohmann::json results_summary(const ExperimentConfig& cfg, const std::string& corpus_hash,
                               const std::vector<ResultRow>& rows) {
  nlohmann::json j;
  j["config"] = cfg;
  j["corpus_hash"] = corpus_hash;
  auto& arr = j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["variant"] = r.variant;
    row["seed"] = r.seed;
    row["split"] = r.split;
    row["metrics"] = r.metrics;
    arr.push_back(std::move(row));
  }
  return j;
}

std::string similarity_csv(const SimilarityResult& r) {
  std::string out = "pair,mean,std,n\n";
  char buf[64];
  for (const auto& s : r.table) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,", s.mean, s.std);
    out += s.pair + "," + buf + std::to_string(s.n) + "\n";
  }
  return out;
}

void write_results(const std::string& stem, const ExperimentConfig& cfg, const std::string& corpus_hash,
                   const std::vector<ResultRow>& rows) {
  write_file_atomically(stem + ".csv", results_csv(rows));
  write_file_atomically(stem + ".json", results_summary(cfg, corpus_hash, rows).dump(2) + "\n");
}

}  // namespace vulcan::harness
