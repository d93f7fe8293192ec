#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cyclekit/cycle_graph.hpp"
#include "cyclekit/gcn.hpp"
#include "cyclekit/kg.hpp"
#include "cyclekit/model.hpp"
#include "cyclekit/network.hpp"
#include "cyclekit/sequences.hpp"
#include "cyclekit/spt.hpp"

namespace cyclekit {

// Everything the model needs about one split: the working graph with the
// targets inserted and inverses materialized, the tree bases with incidence
// matrices, the per-basis cycle graphs with normalized adjacencies, and the
// deduplicated sequence table plus the per-basis map from cycle to sequence
// row. Cycles from different bases reading the same tokens share a row.
struct PreparedInstance {
    KnowledgeGraph graph;
    std::vector<EdgeId> target_edges;
    std::vector<std::uint8_t> labels;
    std::vector<BasisBundle> bases;
    std::vector<CycleGraph> graphs;
    std::vector<Eigen::SparseMatrix<double>> adjacency;
    SequenceTable sequences{0};
    std::vector<std::vector<std::uint32_t>> cycle_seq;
    std::size_t num_bases_requested = 0;
};

PreparedInstance prepare_instance(const KnowledgeGraph& split,
                                  const TargetSet& targets, std::size_t k,
                                  std::size_t m, std::uint64_t seed);

// Intermediates one forward pass keeps alive for the backward pass.
struct ForwardState {
    Eigen::MatrixXd encoded;
    std::vector<GcnCache> gcn;
    std::vector<HeadCache> head;
    std::vector<RoutedConfidence> routed;
    Aggregated agg;
};

struct PredictionBatch {
    double loss = 0.0;
    Eigen::VectorXd y_final;
    Eigen::VectorXd weights;                 // one per active basis
    std::vector<Eigen::VectorXd> per_basis;  // routed confidences per basis
};

// Full forward pass: encode sequences once, propagate per basis, score
// cycles, route onto targets, aggregate, take the loss. state may be null
// when no backward pass follows.
PredictionBatch model_forward(const ModelParams& p,
                              const PreparedInstance& inst,
                              const DropoutPlan& drop, ForwardState* state);

// Reverse pass over the whole model. Per-basis contributions accumulate in
// ascending basis order, so the result is deterministic.
ModelParams model_backward(const ModelParams& p, const PreparedInstance& inst,
                           const DropoutPlan& drop, const ForwardState& state);

struct GradCheckFailure {
    std::string tensor;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

// Margins are reported so callers can reject instances where the loss is
// within finite-difference reach of a max-routing or relu kink.
struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t probes = 0;
    double routing_margin = 0.0;  // min top-2 confidence gap over targets
    double kink_margin = 0.0;     // min |pre-activation| over relu inputs
    std::vector<GradCheckFailure> failures;
    bool passed = false;
};

// Central differences with h = 1e-5 against the analytic gradients, probing
// at most max_probes parameters round-robin across tensors. Dropout is off;
// the relative error denominator is floored at 1e-6.
GradCheckReport gradient_check(const ModelParams& p,
                               const PreparedInstance& inst, double tolerance,
                               std::size_t max_probes = 20);

}  // namespace cyclekit
