#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vulcan/harness/experiment.hpp"
#include "vulcan/harness/metrics.hpp"
#include "vulcan/model/config.hpp"

namespace vulcan::harness {

struct AblationRow {
  model::Variant variant = model::Variant::Full;
  std::uint64_t seed = 0;
  ExperimentConfig config;  // base config with only the variant (and seed) changed
  int best_epoch = 0;
  Metrics val;
  Metrics test;
};

inline const std::vector<model::Variant> kAllVariants{model::Variant::Full, model::Variant::NoEndpoints,
                                                      model::Variant::PrevLine, model::Variant::NoAttn};

using AblationProgress = std::function<void(const AblationRow&)>;

/// One training run per (variant, seed), variants outermost.
std::vector<AblationRow> run_ablation_suite(const Dataset& data, const ExperimentConfig& base,
                                            const std::vector<model::Variant>& variants,
                                            const std::vector<std::uint64_t>& seeds,
                                            const AblationProgress& progress = {});

/// Median of the validation F1 (undefined as 0) of the rows for `variant`.
double median_val_f1(const std::vector<AblationRow>& rows, model::Variant variant);

double median(std::vector<double> values);

}  // namespace vulcan::harness
