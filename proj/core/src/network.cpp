#include "cyclekit/network.hpp"

#include <cmath>

#include "cyclekit/error.hpp"

namespace cyclekit {

namespace {
constexpr double kBceEps = 1e-7;
}

Eigen::VectorXd cycle_confidence(const ModelParams& p, const Eigen::MatrixXd& x,
                                 HeadCache* cache) {
    if (x.cols() != p.mlp_w1.rows())
        throw DimensionError("head input width does not match weights");
    Eigen::MatrixXd pre1 = (x * p.mlp_w1).rowwise() + p.mlp_b1.transpose();
    Eigen::MatrixXd h1 = pre1.cwiseMax(0.0);
    Eigen::VectorXd logits =
        (h1 * p.mlp_w2).array() + p.mlp_b2;
    Eigen::VectorXd conf =
        (1.0 + (-logits.array()).exp()).inverse().matrix();
    if (cache) {
        cache->x = x;
        cache->pre1 = std::move(pre1);
        cache->p = conf;
    }
    return conf;
}

void cycle_confidence_backward(const ModelParams& p, const HeadCache& cache,
                               const Eigen::VectorXd& d_p, ModelParams& grads,
                               Eigen::MatrixXd& d_x) {
    // Sigmoid derivative from the saved outputs.
    Eigen::VectorXd ds =
        (d_p.array() * cache.p.array() * (1.0 - cache.p.array())).matrix();
    Eigen::MatrixXd h1 = cache.pre1.cwiseMax(0.0);
    grads.mlp_w2.noalias() += h1.transpose() * ds;
    grads.mlp_b2 += ds.sum();
    Eigen::MatrixXd dh1 = ds * p.mlp_w2.transpose();
    Eigen::MatrixXd dpre1 =
        (dh1.array() * (cache.pre1.array() > 0.0).cast<double>()).matrix();
    grads.mlp_w1.noalias() += cache.x.transpose() * dpre1;
    grads.mlp_b1 += dpre1.colwise().sum().transpose();
    d_x = dpre1 * p.mlp_w1.transpose();
}

RoutedConfidence route_confidence(const Eigen::VectorXd& cycle_conf,
                                  const IncidenceMatrix& incidence,
                                  const std::vector<EdgeId>& target_edges) {
    RoutedConfidence out;
    out.y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target_edges.size()));
    out.source_cycle.assign(target_edges.size(), -1);
    for (std::size_t t = 0; t < target_edges.size(); ++t) {
        EdgeId e = target_edges[t];
        if (e >= incidence.rows())
            throw DimensionError("target edge outside the incidence matrix");
        for (std::uint32_t j : incidence.row(e)) {
            double v = cycle_conf(static_cast<Eigen::Index>(j));
            // Strict comparison with ascending j keeps the lowest index on
            // ties.
            if (out.source_cycle[t] < 0 ||
                v > out.y(static_cast<Eigen::Index>(t))) {
                out.y(static_cast<Eigen::Index>(t)) = v;
                out.source_cycle[t] = static_cast<std::int32_t>(j);
            }
        }
    }
    return out;
}

void route_confidence_backward(const RoutedConfidence& routed,
                               const Eigen::VectorXd& d_y,
                               Eigen::VectorXd& d_cycle_conf) {
    if (d_y.size() != routed.y.size())
        throw DimensionError("routing gradient size mismatch");
    for (std::size_t t = 0; t < routed.source_cycle.size(); ++t) {
        std::int32_t j = routed.source_cycle[t];
        if (j >= 0) d_cycle_conf(j) += d_y(static_cast<Eigen::Index>(t));
    }
}

Aggregated aggregate_bases(const ModelParams& p,
                           const std::vector<Eigen::VectorXd>& per_basis) {
    const Eigen::Index b = static_cast<Eigen::Index>(per_basis.size());
    if (b == 0) throw DimensionError("no per-basis confidences to aggregate");
    if (b > p.mixing_logits.size())
        throw DimensionError("more active bases than mixing logits");
    const Eigen::Index t = per_basis.front().size();
    for (const auto& y : per_basis)
        if (y.size() != t)
            throw DimensionError("per-basis confidence lengths differ");

    Aggregated out;
    Eigen::VectorXd logits = p.mixing_logits.head(b);
    Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
    out.weights = (shifted / shifted.sum()).matrix();
    out.y_final = Eigen::VectorXd::Zero(t);
    for (Eigen::Index i = 0; i < b; ++i)
        out.y_final += out.weights(i) * per_basis[i];
    return out;
}

void aggregate_bases_backward(const Aggregated& agg,
                              const std::vector<Eigen::VectorXd>& per_basis,
                              const Eigen::VectorXd& d_final,
                              ModelParams& grads,
                              std::vector<Eigen::VectorXd>& d_per_basis) {
    const Eigen::Index b = static_cast<Eigen::Index>(per_basis.size());
    d_per_basis.resize(per_basis.size());
    Eigen::VectorXd dw(b);
    for (Eigen::Index i = 0; i < b; ++i) {
        d_per_basis[i] = agg.weights(i) * d_final;
        dw(i) = d_final.dot(per_basis[i]);
    }
    // Softmax Jacobian: dlogit_a = w_a (dw_a - sum_b w_b dw_b).
    double mixed = agg.weights.dot(dw);
    grads.mixing_logits.head(b) +=
        (agg.weights.array() * (dw.array() - mixed)).matrix();
}

double bce_loss(const Eigen::VectorXd& y_pred,
                const std::vector<std::uint8_t>& labels) {
    if (static_cast<std::size_t>(y_pred.size()) != labels.size())
        throw DimensionError("prediction and label counts differ");
    if (labels.empty()) throw DimensionError("loss over an empty target set");
    double total = 0.0;
    for (Eigen::Index i = 0; i < y_pred.size(); ++i) {
        double q = std::min(1.0 - kBceEps, std::max(kBceEps, y_pred(i)));
        total += labels[static_cast<std::size_t>(i)] ? -std::log(q)
                                                     : -std::log(1.0 - q);
    }
    return total / static_cast<double>(y_pred.size());
}

Eigen::VectorXd bce_loss_backward(const Eigen::VectorXd& y_pred,
                                  const std::vector<std::uint8_t>& labels) {
    if (static_cast<std::size_t>(y_pred.size()) != labels.size())
        throw DimensionError("prediction and label counts differ");
    const double n = static_cast<double>(y_pred.size());
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(y_pred.size());
    for (Eigen::Index i = 0; i < y_pred.size(); ++i) {
        double v = y_pred(i);
        // Inside the clamp window the derivative is the usual one; at or
        // beyond the clamp the loss is locally constant in the prediction.
        if (v <= kBceEps || v >= 1.0 - kBceEps) continue;
        grad(i) = (labels[static_cast<std::size_t>(i)] ? -1.0 / v
                                                       : 1.0 / (1.0 - v)) /
                  n;
    }
    return grad;
}

}  // namespace cyclekit
