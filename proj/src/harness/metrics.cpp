#include "vulcan/harness/metrics.hpp"

#include <cstdio>
#include <stdexcept>

namespace vulcan::harness {

Metrics compute_metrics(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m{tp, fp, tn, fn, {}, {}, {}, {}, {}};
  const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.fpr = ratio(fp, fp + tn);
  m.fnr = ratio(fn, tp + fn);
  m.precision = ratio(tp, tp + fp);
  if (m.fnr) m.recall = 1.0 - *m.fnr;
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

Metrics metrics_from_scores(const std::vector<double>& probabilities, const std::vector<int>& labels,
                            double threshold) {
  if (probabilities.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  return compute_metrics(tp, fp, tn, fn);
}

double f1_or_zero(const Metrics& m) { return m.f1.value_or(0.0); }

std::string format_ratio(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

void to_json(nlohmann::json& j, const Metrics& m) {
  const auto ratio = [](const std::optional<double>& v) -> nlohmann::json {
    if (!v) return "undefined";
    return *v;
  };
  j = nlohmann::json{{"tp", m.tp},
                     {"fp", m.fp},
                     {"tn", m.tn},
                     {"fn", m.fn},
                     {"fpr", ratio(m.fpr)},
                     {"fnr", ratio(m.fnr)},
                     {"precision", ratio(m.precision)},
                     {"recall", ratio(m.recall)},
                     {"f1", ratio(m.f1)}};
}

}  // namespace vulcan::harness
