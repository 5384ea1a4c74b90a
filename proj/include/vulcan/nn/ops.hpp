#pragma once

#include <optional>
#include <vector>

#include "vulcan/nn/graph.hpp"

namespace vulcan::nn {

enum class Activation { Identity, ReLU, Tanh, Sigmoid };

/// act(x W + b) for x [batch,in], W [in,out], b [out].
Var dense(Graph& g, Var x, Var w, std::optional<Var> b, Activation act);

/// One piece of a block-sparse input row: row `v_row` of `v` placed at
/// column `offset` of row `row` of the (implicit, zero elsewhere) input.
struct SlotInput {
  std::size_t row;
  std::size_t offset;
  Var v;
  std::size_t v_row = 0;
};

/// Same result as dense() on the zero-padded input matrix, touching only the
/// populated blocks. `batch` is the number of input rows.
Var block_dense(Graph& g, std::size_t batch, const std::vector<SlotInput>& inputs, Var w, std::optional<Var> b,
                Activation act);

Var activate(Graph& g, Var x, Activation act);

Var add(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
/// Sum of all entries as a [1,1] value.
Var sum(Graph& g, Var x);

/// Row `i` of x as [1, cols].
Var row(Graph& g, Var x, std::size_t i);
/// Columns [begin, end) of x.
Var slice_cols(Graph& g, Var x, std::size_t begin, std::size_t end);
/// Horizontal concatenation of inputs with equal row counts.
Var concat_cols(Graph& g, const std::vector<Var>& parts);
/// Vertical concatenation of inputs with equal column counts.
Var stack_rows(Graph& g, const std::vector<Var>& parts);
/// Rows of `table` selected by `indices`, as [indices.size(), cols].
Var gather_rows(Graph& g, Var table, const std::vector<int>& indices);

}  // namespace vulcan::nn
