#include "cyclekit/gcn.hpp"

#include <cmath>
#include <vector>

#include "cyclekit/error.hpp"

namespace cyclekit {

namespace {

void apply_mask(Eigen::MatrixXd& m, const DropoutPlan& drop, std::uint64_t tag,
                std::uint64_t basis) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) *= drop.mask(tag, basis, static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(j));
}

}  // namespace

Eigen::SparseMatrix<double> normalized_adjacency(const CycleGraph& g) {
    std::vector<double> deg(g.num_nodes, 1.0);  // the self loop
    for (auto [u, v] : g.edges) {
        deg[u] += 1.0;
        deg[v] += 1.0;
    }
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(2 * g.edges.size() + g.num_nodes);
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        int ii = static_cast<int>(i);
        entries.emplace_back(ii, ii, 1.0 / deg[i]);
    }
    for (auto [u, v] : g.edges) {
        double w = 1.0 / std::sqrt(deg[u] * deg[v]);
        entries.emplace_back(static_cast<int>(u), static_cast<int>(v), w);
        entries.emplace_back(static_cast<int>(v), static_cast<int>(u), w);
    }
    Eigen::SparseMatrix<double> m(static_cast<int>(g.num_nodes),
                                  static_cast<int>(g.num_nodes));
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
}

Eigen::MatrixXd gcn_forward(const ModelParams& p,
                            const Eigen::SparseMatrix<double>& adj,
                            const Eigen::MatrixXd& x0, const DropoutPlan& drop,
                            std::uint64_t basis, GcnCache* cache) {
    if (x0.cols() != p.gcn_w1.rows())
        throw DimensionError("propagation input width does not match weights");
    if (adj.rows() != x0.rows())
        throw DimensionError("adjacency size does not match node count");

    Eigen::MatrixXd x0d = x0;
    if (drop.active()) apply_mask(x0d, drop, kDropGcnLayer1, basis);
    Eigen::MatrixXd pre1 = adj * (x0d * p.gcn_w1);
    Eigen::MatrixXd h1d = pre1.cwiseMax(0.0);
    if (drop.active()) apply_mask(h1d, drop, kDropGcnLayer2, basis);
    Eigen::MatrixXd out = adj * (h1d * p.gcn_w2);
    if (cache) {
        cache->x0d = std::move(x0d);
        cache->pre1 = std::move(pre1);
        cache->h1d = std::move(h1d);
    }
    return out;
}

void gcn_backward(const ModelParams& p, const Eigen::SparseMatrix<double>& adj,
                  const GcnCache& cache, const Eigen::MatrixXd& d_out,
                  const DropoutPlan& drop, std::uint64_t basis,
                  ModelParams& grads, Eigen::MatrixXd& d_x0) {
    // out = A (h1d W2) with A symmetric, so gradients propagate through A
    // unchanged on each side.
    Eigen::MatrixXd dz = adj * d_out;
    grads.gcn_w2.noalias() += cache.h1d.transpose() * dz;
    Eigen::MatrixXd dh1 = dz * p.gcn_w2.transpose();
    if (drop.active()) apply_mask(dh1, drop, kDropGcnLayer2, basis);
    Eigen::MatrixXd dpre1 =
        (dh1.array() * (cache.pre1.array() > 0.0).cast<double>()).matrix();
    Eigen::MatrixXd dy = adj * dpre1;
    grads.gcn_w1.noalias() += cache.x0d.transpose() * dy;
    d_x0 = dy * p.gcn_w1.transpose();
    if (drop.active()) apply_mask(d_x0, drop, kDropGcnLayer1, basis);
}

}  // namespace cyclekit
