#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cyclekit/kg.hpp"
#include "cyclekit/model.hpp"
#include "cyclekit/spt.hpp"

namespace cyclekit {

struct HeadCache {
    Eigen::MatrixXd x;     // head input, one row per cycle
    Eigen::MatrixXd pre1;  // hidden pre-activation
    Eigen::VectorXd p;     // confidences, needed for the sigmoid derivative
};

// Per-cycle confidence: two dense layers, relu inside, sigmoid on the scalar
// output. cache may be null when no backward pass follows.
Eigen::VectorXd cycle_confidence(const ModelParams& p, const Eigen::MatrixXd& x,
                                 HeadCache* cache);

// d_p is the gradient at the sigmoid output. d_x is overwritten; weight
// gradients accumulate into grads.
void cycle_confidence_backward(const ModelParams& p, const HeadCache& cache,
                               const Eigen::VectorXd& d_p, ModelParams& grads,
                               Eigen::MatrixXd& d_x);

// Per-target confidence under one basis: the max over the cycles covering
// the target's edge. source_cycle records the argmax (lowest index on ties)
// and stays -1 for uncovered targets, whose confidence is 0 and which pass
// no gradient.
struct RoutedConfidence {
    Eigen::VectorXd y;
    std::vector<std::int32_t> source_cycle;
};

RoutedConfidence route_confidence(const Eigen::VectorXd& cycle_conf,
                                  const IncidenceMatrix& incidence,
                                  const std::vector<EdgeId>& target_edges);

// Routing is piecewise linear: each target's gradient lands on its argmax
// cycle only. Accumulates into d_cycle_conf.
void route_confidence_backward(const RoutedConfidence& routed,
                               const Eigen::VectorXd& d_y,
                               Eigen::VectorXd& d_cycle_conf);

// Softmax-weighted mixture of per-basis confidences. Only logits.head(B)
// participate when B bases are active; trailing logits get no gradient.
struct Aggregated {
    Eigen::VectorXd y_final;
    Eigen::VectorXd weights;  // softmax over the active prefix
};

Aggregated aggregate_bases(const ModelParams& p,
                           const std::vector<Eigen::VectorXd>& per_basis);

// Fills d_per_basis (resized to match) and accumulates the logit gradient.
void aggregate_bases_backward(const Aggregated& agg,
                              const std::vector<Eigen::VectorXd>& per_basis,
                              const Eigen::VectorXd& d_final,
                              ModelParams& grads,
                              std::vector<Eigen::VectorXd>& d_per_basis);

// Mean binary cross entropy. Predictions are clamped to [eps, 1 - eps] with
// eps = 1e-7; a clamped prediction contributes a constant term, so its
// gradient is exactly zero there.
double bce_loss(const Eigen::VectorXd& y_pred,
                const std::vector<std::uint8_t>& labels);

Eigen::VectorXd bce_loss_backward(const Eigen::VectorXd& y_pred,
                                  const std::vector<std::uint8_t>& labels);

}  // namespace cyclekit
