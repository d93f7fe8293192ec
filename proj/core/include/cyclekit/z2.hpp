#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cyclekit/kg.hpp"

namespace cyclekit {

// Bit vector over a fixed universe, with addition = XOR. Indexed by edge ids
// for 1-chains and by vertex ids for 0-chains; the algebra is the same.
class Z2Chain {
public:
    Z2Chain() = default;
    explicit Z2Chain(std::size_t universe)
        : universe_(universe), words_((universe + 63) / 64, 0) {}

    static Z2Chain from_indices(std::size_t universe,
                                std::span<const std::uint32_t> indices);

    std::size_t universe() const { return universe_; }

    bool test(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1;
    }
    void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

    std::size_t popcount() const;
    bool empty() const;  // true when every bit is zero

    Z2Chain& operator^=(const Z2Chain& o);
    friend Z2Chain operator^(Z2Chain a, const Z2Chain& b) {
        a ^= b;
        return a;
    }
    friend bool operator==(const Z2Chain&, const Z2Chain&) = default;

    // Set indices, ascending.
    std::vector<std::uint32_t> indices() const;

    const std::vector<std::uint64_t>& words() const { return words_; }

private:
    std::size_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

// Mod-2 sum. Same operation as operator^, named for call sites that read
// better as chain arithmetic.
inline Z2Chain chain_add(const Z2Chain& a, const Z2Chain& b) { return a ^ b; }

// Vertex-by-edge incidence over GF(2): column e has ones at the two
// endpoints of edge e. Kernel elements of the induced map are the cycles.
class BoundaryMatrix {
public:
    BoundaryMatrix() = default;
    BoundaryMatrix(std::size_t num_vertices,
                   std::vector<std::pair<EntityId, EntityId>> endpoints);

    std::size_t num_vertices() const { return num_vertices_; }
    std::size_t num_edges() const { return endpoints_.size(); }

    // Boundary of an edge chain: a vertex chain marking the vertices with
    // odd incidence to the selected edges.
    Z2Chain apply(const Z2Chain& chain) const;
    bool is_cycle(const Z2Chain& chain) const { return apply(chain).empty(); }

private:
    std::size_t num_vertices_ = 0;
    std::vector<std::pair<EntityId, EntityId>> endpoints_;
};

BoundaryMatrix boundary_matrix(const KnowledgeGraph& g);
Z2Chain apply_boundary(const BoundaryMatrix& m, const Z2Chain& chain);
bool is_cycle(const BoundaryMatrix& m, const Z2Chain& chain);

// Dimension of the cycle space: |E| - |V| + number of connected components.
// Isolated vertices each count as a component.
std::size_t betti_number(const KnowledgeGraph& g);

// Rank of the span of the given chains, by Gaussian elimination.
std::size_t z2_rank(std::span<const Z2Chain> chains);

// Coefficients expressing target in the span of basis, if any. The result is
// a chain over universe basis.size(): bit j set means basis[j] participates.
std::optional<Z2Chain> solve_in_span(std::span<const Z2Chain> basis,
                                     const Z2Chain& target);

}  // namespace cyclekit
