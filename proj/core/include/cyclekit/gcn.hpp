#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cyclekit/cycle_graph.hpp"
#include "cyclekit/model.hpp"

namespace cyclekit {

// Symmetric degree-normalized adjacency with self loops: entry (i, j) is
// 1/sqrt(d_i d_j) with d counting neighbors plus the loop. An isolated node
// gets an identity row, so propagation keeps its feature.
Eigen::SparseMatrix<double> normalized_adjacency(const CycleGraph& g);

struct GcnCache {
    Eigen::MatrixXd x0d;   // layer-1 input after dropout
    Eigen::MatrixXd pre1;  // layer-1 pre-activation, relu derivative source
    Eigen::MatrixXd h1d;   // layer-2 input after dropout
};

// Two propagation layers with relu between them. Dropout hits each layer's
// input; basis tags the mask coordinates so bases draw independent masks.
// cache may be null when no backward pass follows.
Eigen::MatrixXd gcn_forward(const ModelParams& p,
                            const Eigen::SparseMatrix<double>& adj,
                            const Eigen::MatrixXd& x0, const DropoutPlan& drop,
                            std::uint64_t basis, GcnCache* cache);

// d_x0 is overwritten with the input gradient; weight gradients accumulate
// into grads.
void gcn_backward(const ModelParams& p, const Eigen::SparseMatrix<double>& adj,
                  const GcnCache& cache, const Eigen::MatrixXd& d_out,
                  const DropoutPlan& drop, std::uint64_t basis,
                  ModelParams& grads, Eigen::MatrixXd& d_x0);

}  // namespace cyclekit
