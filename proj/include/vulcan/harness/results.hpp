#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vulcan/harness/ablation.hpp"
#include "vulcan/harness/experiment.hpp"
#include "vulcan/harness/metrics.hpp"
#include "vulcan/harness/similarity_experiment.hpp"

namespace vulcan::harness {

struct ResultRow {
  std::string variant;  // model variant or baseline name
  std::uint64_t seed = 0;
  std::string split;
  Metrics metrics;
};

inline constexpr const char* kResultsHeader = "variant,seed,split,tp,fp,tn,fn,fpr,fnr,precision,recall,f1";

std::string results_csv(const std::vector<ResultRow>& rows);

/// Two rows (val, test) per ablation run.
std::vector<ResultRow> result_rows(const std::vector<AblationRow>& rows);

/// Config and corpus hash stamp plus the rows.
nlohmann::json results_summary(const ExperimentConfig& cfg, const std::string& corpus_hash,
                               const std::vector<ResultRow>& rows);

std::string similarity_csv(const SimilarityResult& r);

/// `<stem>.csv` and `<stem>.json`, each written atomically.
void write_results(const std::string& stem, const ExperimentConfig& cfg, const std::string& corpus_hash,
                   const std::vector<ResultRow>& rows);

}  // namespace vulcan::harness
