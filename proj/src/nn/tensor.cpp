#include "vulcan/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vulcan::nn {

Tensor::Tensor(std::vector<std::size_t> dims, double fill_value) : shape(std::move(dims)) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  data.assign(shape.empty() ? 0 : n, fill_value);
}

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t c = rows.empty() ? 0 : rows.front().size();
  Tensor t({rows.size(), c});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != c) throw ShapeMismatch("ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), t.row(r));
  }
  return t;
}

Tensor Tensor::row_vector(const std::vector<double>& values) {
  Tensor t({1, values.size()});
  t.data = values;
  return t;
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

Parameter& ParameterStore::add(const std::string& name, Tensor init, bool trainable) {
  if (index_.count(name) > 0) throw Error(ErrorCategory::Internal, "parameter '" + name + "' registered twice");
  Parameter p;
  p.name = name;
  p.grad = Tensor(init.shape);
  p.value = std::move(init);
  p.trainable = trainable;
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorCategory::Internal, "no parameter '" + name + "'");
  return params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

void ParameterStore::zero_grads() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

}  // namespace vulcan::nn
