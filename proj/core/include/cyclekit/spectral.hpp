#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cyclekit/kg.hpp"

namespace cyclekit {

// k roots apportioned across connected components by size (largest
// remainder; every component gets one when k >= component count, allocations
// are capped at component size). Within a component the allocated number of
// clusters is found by spectral clustering of the symmetric normalized
// Laplacian, and the member nearest each cluster centroid becomes a root.
// Output order: components by label, clusters by index. Fully seeded.
std::vector<EntityId> spectral_roots(const KnowledgeGraph& g, std::size_t k,
                                     std::uint64_t seed);

// Per-component root counts used by spectral_roots; exposed for tests.
std::vector<std::size_t> apportion_roots(const std::vector<std::size_t>& sizes,
                                         std::size_t k);

// Rows are the vertices of `members` (ascending); columns are the `dim`
// eigenvectors of the component's symmetric normalized Laplacian with the
// smallest eigenvalues. Dense solve below 3000 vertices, seeded Lanczos with
// full reorthogonalization above (residual tolerance 1e-8, fixed iteration
// cap). Column signs are canonicalized.
Eigen::MatrixXd spectral_embedding(const KnowledgeGraph& g,
                                   const std::vector<EntityId>& members,
                                   std::size_t dim, std::uint64_t seed);

// Eigenvalues of the symmetric normalized Laplacian of the whole graph,
// ascending. Dense solve; intended for small graphs and tests.
Eigen::VectorXd sym_laplacian_eigenvalues(const KnowledgeGraph& g);

struct KMeansResult {
    std::vector<int> assignment;
    Eigen::MatrixXd centroids;  // k x dim
    double wcss = 0.0;
};

// Lloyd iterations with k-means++ seeding, 10 restarts, best by within-
// cluster sum of squares. Ties break toward the lowest cluster index and the
// earlier restart; empty clusters are re-seeded from the point farthest from
// its centroid. Deterministic for a fixed seed.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k,
                    std::uint64_t seed);

}  // namespace cyclekit
