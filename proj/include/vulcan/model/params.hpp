#pragma once

#include <cstdint>

#include "vulcan/deps/vocab.hpp"
#include "vulcan/model/config.hpp"
#include "vulcan/nn/tensor.hpp"

namespace vulcan::model {

/// Every weight array of the configured variant, freshly initialised:
/// Glorot-uniform matrices, zero biases (LSTM forget gates at 1), unit batch
/// norm scale, uniform(-1, 1) embeddings for operators/builtins and for the
/// frozen undefined-token vector `define.undefined`. Each array draws from
/// its own sub-seed of `seed`, keyed by name.
///
/// Names: path.embedding, lstm.{fwd,bwd}.{w,b}, context.readout.{w,b}
/// (context.final_state.{w,b} without attention), ffn_a.w1,
/// ffn_a.bn.{gamma,beta,running_mean,running_var}, ffn_a.{w2,b2},
/// define.op_embedding, define.undefined (both absent without end-points),
/// ffn_b.* as ffn_a, ffn_c.{w1,b1,w2,b2}.
nn::ParameterStore init_params(const ModelConfig& cfg, const deps::Vocab& vocab, std::uint64_t seed);

}  // namespace vulcan::model
