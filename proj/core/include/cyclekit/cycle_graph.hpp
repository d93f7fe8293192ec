#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cyclekit/spt.hpp"

namespace cyclekit {

// Pairwise shared-edge counts between cycles of one basis: the Gram matrix
// of the incidence columns. Stored sparsely per row; the diagonal entry is
// the cycle length.
class OverlapMatrix {
public:
    OverlapMatrix() = default;
    explicit OverlapMatrix(std::size_t size) : rows_(size) {}

    std::size_t size() const { return rows_.size(); }

    // (cycle index, shared edge count), ascending by cycle index. Includes
    // the diagonal.
    std::span<const std::pair<std::uint32_t, std::uint32_t>> row(
        std::size_t i) const {
        return rows_[i];
    }

    std::uint32_t count(std::size_t i, std::size_t j) const;

    void set_row(std::size_t i,
                 std::vector<std::pair<std::uint32_t, std::uint32_t>> row) {
        rows_[i] = std::move(row);
    }

private:
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> rows_;
};

// Computed row by row: scatter the incidence rows touched by each cycle's
// edges into a dense counter, then collect. Work is sum over edges of the
// squared cover count, never beta^2.
OverlapMatrix cycle_overlap(const IncidenceMatrix& ct);

// Graph over the cycles of one basis. Node i keeps edges to its top-m
// overlap neighbors (count descending, index ascending on ties); zero
// overlap never creates an edge. The union over nodes is symmetrized and
// deduplicated. Edges are unweighted downstream; the count is metadata.
struct CycleGraph {
    std::size_t num_nodes = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // u < v, sorted
    std::vector<std::uint32_t> overlap;                          // per edge
    Eigen::MatrixXd features;  // per-node rows, filled by the encoder stage
};

CycleGraph build_cycle_graph(const OverlapMatrix& overlap, std::size_t m);

}  // namespace cyclekit
