#pragma once

#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "vulcan/nn/tensor.hpp"

namespace vulcan::nn {

/// Handle to a value recorded on a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
  friend bool operator==(Var, Var) = default;
};

/// Reverse-mode tape. Each op appends a node holding its value and a closure
/// that pushes the node's gradient to its inputs. Parameter leaves alias the
/// Parameter's value and grad, so backward accumulates straight into them.
class Graph {
 public:
  using Backward = std::function<void(Graph&)>;

  /// With recording off no closures are kept; backward() is then an error.
  explicit Graph(bool recording = true) : recording_(recording) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return recording_; }

  Var constant(Tensor value);
  Var param(Parameter& p);

  const Tensor& value(Var v) const;
  /// Gradient buffer for `v`, zero-initialised on first access.
  Tensor& grad(Var v);
  bool has_grad(Var v) const;
  /// False for constant leaves, whose gradients nobody reads.
  bool needs_grad(Var v) const;

  /// Appends a computed node. `backward` may be empty for leaves.
  Var push(Tensor value, Backward backward);

  /// Seeds d(out)/d(out) = 1 for a single-element `out` and runs the tape.
  void backward(Var out);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    Backward backward;
  };
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  bool recording_;

  Node& node(Var v);
  const Node& node(Var v) const;
};

}  // namespace vulcan::nn
