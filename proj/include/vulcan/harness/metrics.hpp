#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vulcan::harness {

/// Confusion counts and the five ratios. A ratio whose denominator is zero
/// is std::nullopt ("undefined"), never 0.
struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<double> precision;
  std::optional<double> recall;  // exactly 1 - fnr
  std::optional<double> f1;      // exactly 2PR/(P+R)

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics compute_metrics(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

/// Positive when probability >= threshold.
Metrics metrics_from_scores(const std::vector<double>& probabilities, const std::vector<int>& labels,
                            double threshold = 0.5);

/// F1 for ranking runs; undefined counts as 0.
double f1_or_zero(const Metrics& m);

/// Fixed 6-decimal rendering, or "undefined".
std::string format_ratio(const std::optional<double>& v);

void to_json(nlohmann::json& j, const Metrics& m);

}  // namespace vulcan::harness
