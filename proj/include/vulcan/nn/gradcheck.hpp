#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vulcan/nn/graph.hpp"

namespace vulcan::nn {

/// |a − n| / max(1e-12, |a| + |n|).
double relative_error(double analytic, double numeric);

struct GradCheckOptions {
  double h = 1e-6;
  /// 0 checks every coordinate. Otherwise at most this many per parameter:
  /// half drawn from coordinates with a nonzero analytic gradient, the rest
  /// uniformly.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 1;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

/// Compares backward() of the scalar built by `f` against central
/// differences (f(θ+h) − f(θ−h)) / 2h. `f` must be a pure function of the
/// parameter values (no running-statistic updates). Gradients are left zeroed.
GradCheckReport finite_diff_check(const std::function<Var(Graph&)>& f, const std::vector<Parameter*>& params,
                                  const GradCheckOptions& options = {});

}  // namespace vulcan::nn
