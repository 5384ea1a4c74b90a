#include "vulcan/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace vulcan::nn {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-12, std::abs(analytic) + std::abs(numeric));
}

namespace {

std::vector<std::size_t> pick_coordinates(const Tensor& grad, std::size_t limit, std::mt19937_64& rng) {
  std::vector<std::size_t> all(grad.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (limit == 0 || all.size() <= limit) return all;

  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (grad.data[i] != 0.0) nonzero.push_back(i);
  }
  std::shuffle(nonzero.begin(), nonzero.end(), rng);
  std::vector<std::size_t> picked(nonzero.begin(), nonzero.begin() + std::min(nonzero.size(), limit / 2));
  std::uniform_int_distribution<std::size_t> any(0, grad.size() - 1);
  while (picked.size() < limit) picked.push_back(any(rng));
  std::sort(picked.begin(), picked.end());
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
  return picked;
}

double evaluate(const std::function<Var(Graph&)>& f) {
  Graph g(false);
  const Var out = f(g);
  return g.value(out).data.at(0);
}

}  // namespace

GradCheckReport finite_diff_check(const std::function<Var(Graph&)>& f, const std::vector<Parameter*>& params,
                                  const GradCheckOptions& options) {
  for (Parameter* p : params) p->grad = Tensor(p->value.shape);
  {
    Graph g;
    g.backward(f(g));
  }
  std::vector<Tensor> analytic;
  for (Parameter* p : params) {
    analytic.push_back(p->grad);
    p->grad.fill(0.0);
  }

  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  const double h = options.h;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i : pick_coordinates(analytic[pi], options.max_coords_per_param, rng)) {
      const double saved = p.value.data[i];
      p.value.data[i] = saved + h;
      const double up = evaluate(f);
      p.value.data[i] = saved - h;
      const double down = evaluate(f);
      p.value.data[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[pi].data[i];
      const double err = relative_error(a, numeric);
      ++report.coords_checked;
      if (err > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        report.worst_param = p.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace vulcan::nn
