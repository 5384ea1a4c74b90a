#include "vulcan/nn/graph.hpp"

namespace vulcan::nn {

Graph::Node& Graph::node(Var v) {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw Error(ErrorCategory::Internal, "invalid graph variable");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Graph::Node& Graph::node(Var v) const { return const_cast<Graph*>(this)->node(v); }

Var Graph::constant(Tensor value) { return push(std::move(value), nullptr); }

Var Graph::param(Parameter& p) {
  const auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{it->second};
  Node n;
  n.param = &p;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size() - 1);
  param_nodes_.emplace(&p, id);
  return Var{id};
}

const Tensor& Graph::value(Var v) const {
  const Node& n = node(v);
  return n.param ? n.param->value : n.value;
}

Tensor& Graph::grad(Var v) {
  Node& n = node(v);
  if (n.param) {
    if (n.param->grad.shape != n.param->value.shape) n.param->grad = Tensor(n.param->value.shape);
    return n.param->grad;
  }
  if (n.grad.shape != n.value.shape) n.grad = Tensor(n.value.shape);
  return n.grad;
}

bool Graph::has_grad(Var v) const {
  const Node& n = node(v);
  return n.param ? true : !n.grad.empty();
}

bool Graph::needs_grad(Var v) const {
  const Node& n = node(v);
  return n.param != nullptr || static_cast<bool>(n.backward);
}

Var Graph::push(Tensor value, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (recording_) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

void Graph::backward(Var out) {
  if (!recording_) throw Error(ErrorCategory::Internal, "backward on a non-recording graph");
  if (value(out).size() != 1) throw ShapeMismatch("backward needs a scalar output");
  grad(out).data[0] += 1.0;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.param || !n.backward || n.grad.empty()) continue;
    n.backward(*this);
  }
}

}  // namespace vulcan::nn
