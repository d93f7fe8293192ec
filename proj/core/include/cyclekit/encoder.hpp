#pragma once

#include <Eigen/Dense>

#include "cyclekit/model.hpp"
#include "cyclekit/sequences.hpp"

namespace cyclekit {

// Encode every distinct sequence in the table. Both rotations run through
// the same two-layer recurrent encoder (zero initial states); row q of the
// result is [h_fwd + h_rev ; c_fwd + c_rev] built from the final top-layer
// states, giving 2 * hidden_dim columns.
//
// Sequences are processed in fixed-size token-budget chunks, batched by
// length inside each chunk, so throughput comes from matrix products while
// results stay independent of the batching.
Eigen::MatrixXd encode_sequences(const ModelParams& p,
                                 const SequenceTable& table,
                                 const DropoutPlan& drop);

// Backward pass: d_features rows match table order. Activations are not
// kept from the forward pass; each chunk reruns its forward with storage,
// then backpropagates through time. Per-chunk gradients are reduced in
// chunk order, which keeps accumulation deterministic.
void encode_sequences_backward(const ModelParams& p, const SequenceTable& table,
                               const DropoutPlan& drop,
                               const Eigen::MatrixXd& d_features,
                               ModelParams& grads);

}  // namespace cyclekit
