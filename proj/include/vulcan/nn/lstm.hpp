#pragma once

#include "vulcan/nn/graph.hpp"

namespace vulcan::nn {

class EmptySequence : public Error {
 public:
  EmptySequence() : Error(ErrorCategory::Internal, "bilstm over an empty sequence") {}
};

/// w is [d_in + h, 4h] acting on [x ; h_prev]; column blocks are the
/// input, forget, output and candidate gates in that order. b is [4h].
struct LstmWeights {
  Var w;
  Var b;
};

struct LstmState {
  Var h;
  Var c;
};

/// i = σ(.), f = σ(.), o = σ(.), g = tanh(.), c = f⊙c_prev + i⊙g, h = o⊙tanh(c).
/// x is [1, d_in]; h_prev and c_prev are [1, h].
LstmState lstm_cell(Graph& g, Var x, Var h_prev, Var c_prev, const LstmWeights& weights);

/// Runs one cell left to right and another right to left over the rows of
/// `seq` [len, d_in] from zero states. Row t of the result is [h_fwd_t ; h_bwd_t].
Var bilstm(Graph& g, Var seq, const LstmWeights& fwd, const LstmWeights& bwd);

}  // namespace vulcan::nn
