#include "vulcan/harness/ablation.hpp"

#include <algorithm>
#include <stdexcept>

#include "vulcan/harness/trainer.hpp"

namespace vulcan::harness {

std::vector<AblationRow> run_ablation_suite(const Dataset& data, const ExperimentConfig& base,
                                            const std::vector<model::Variant>& variants,
                                            const std::vector<std::uint64_t>& seeds,
                                            const AblationProgress& progress) {
  std::vector<AblationRow> rows;
  for (const auto v : variants) {
    for (const auto seed : seeds) {
      AblationRow row;
      row.variant = v;
      row.seed = seed;
      row.config = base;
      row.config.model = model::apply_variant(base.model, v);
      row.config.seed = seed;
      auto result = train(data, row.config);
      row.best_epoch = result.best_epoch;
      row.val = evaluate(result.model, data, corpus::Split::Val);
      row.test = evaluate(result.model, data, corpus::Split::Test);
      if (progress) progress(row);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double median_val_f1(const std::vector<AblationRow>& rows, model::Variant variant) {
  std::vector<double> f1;
  for (const auto& r : rows) {
    if (r.variant == variant) f1.push_back(f1_or_zero(r.val));
  }
  return median(std::move(f1));
}

}  // namespace vulcan::harness
