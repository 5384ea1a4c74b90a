#include "vulcan/harness/similarity_experiment.hpp"

#include <cmath>

#include "vulcan/frontend/ast.hpp"

namespace vulcan::harness {

namespace {

double l2(const nn::Tensor& a, const nn::Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

DistanceSummary summarize(std::string pair, const std::vector<double>& distances) {
  DistanceSummary s;
  s.pair = std::move(pair);
  s.n = distances.size();
  if (s.n == 0) return s;
  for (double d : distances) s.mean += d;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double d : distances) ss += (d - s.mean) * (d - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

double SimilarityResult::pooled_std() const {
  const double a = table[1].std;
  const double b = table[2].std;
  return std::sqrt((a * a + b * b) / 2.0);
}

SimilarityResult similarity_experiment(model::Model& m, const std::vector<corpus::SimilarityTriplet>& triplets) {
  SimilarityResult r;
  for (const auto& tr : triplets) {
    const auto base = m.represent_line(frontend::parse_source(tr.base), tr.base_line);
    const auto mod = m.represent_line(frontend::parse_source(tr.mod_dep), tr.mod_dep_line);
    const auto nomod = m.represent_line(frontend::parse_source(tr.no_mod_dep), tr.no_mod_dep_line);
    r.base_mod.push_back(l2(base, mod));
    r.base_nomod.push_back(l2(base, nomod));
    r.mod_nomod.push_back(l2(mod, nomod));
  }
  r.table = {summarize("BASE-MOD-DEP", r.base_mod), summarize("BASE-NO-MOD-DEP", r.base_nomod),
             summarize("MOD-DEP-NO-MOD-DEP", r.mod_nomod)};
  return r;
}

}  // namespace vulcan::harness
