#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cyclekit/kg.hpp"
#include "cyclekit/z2.hpp"

namespace cyclekit {

// Shortest-path tree from one root, covering the root's component. Vertices
// outside the component have depth -1 and no parent edge.
struct SptTree {
    EntityId root = 0;
    std::vector<EdgeId> parent_edge;   // kNoEdge at the root and off-component
    std::vector<std::int32_t> depth;   // -1 off-component

    bool reached(EntityId v) const { return depth[v] >= 0; }
};

// Breadth-first tree with fixed tie-breaking: each level is processed in
// ascending vertex-id order and incident edges are scanned in ascending
// edge-id order, so among parallel edges the lowest id becomes the tree
// edge. Depths are graph distances from the root.
SptTree build_spt(const KnowledgeGraph& g, EntityId root);

// Lowest common ancestor of u and v in the tree. Both must be reached.
EntityId lca(const KnowledgeGraph& g, const SptTree& tree, EntityId u,
             EntityId v);

// Fundamental cycle basis of the tree's component: one cycle per non-tree
// edge e = (u, v), namely e plus the tree paths from u and v to lca(u, v).
// Cycles are ordered by ascending non-tree edge id.
struct SptCycleBasis {
    SptTree tree;
    std::vector<Z2Chain> cycles;               // universe = graph edge count
    std::vector<EdgeId> nontree_edge;          // generator of each cycle
    std::vector<std::uint32_t> cycle_length;   // edge count per cycle
};

SptCycleBasis spt_cycle_basis(const KnowledgeGraph& g, const SptTree& tree);

// |E| x beta 0/1 matrix: entry (e, j) set when edge e lies on cycle j.
// Stored sparsely in both orientations.
class IncidenceMatrix {
public:
    IncidenceMatrix() = default;
    IncidenceMatrix(std::size_t num_edges,
                    std::vector<std::vector<std::uint32_t>> column_edges);

    std::size_t rows() const { return num_edges_; }
    std::size_t cols() const { return col_offset_.empty() ? 0 : col_offset_.size() - 1; }

    // Edge ids on cycle j, ascending.
    std::span<const std::uint32_t> column(std::size_t j) const;
    // Cycle indices covering edge e, ascending.
    std::span<const std::uint32_t> row(std::size_t e) const;

private:
    std::size_t num_edges_ = 0;
    std::vector<std::uint32_t> col_flat_;
    std::vector<std::size_t> col_offset_;
    std::vector<std::uint32_t> row_flat_;
    std::vector<std::size_t> row_offset_;
};

IncidenceMatrix cycle_incidence_matrix(const SptCycleBasis& basis,
                                       std::size_t num_edges);

struct BasisBundle {
    SptCycleBasis basis;
    IncidenceMatrix incidence;
};

// One tree basis per root from spectral_roots(g, k, seed), in root order.
std::vector<BasisBundle> build_all_bases(const KnowledgeGraph& g,
                                         std::size_t k, std::uint64_t seed);

}  // namespace cyclekit
