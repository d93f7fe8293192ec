#include "cyclekit/z2.hpp"

#include <bit>

#include "cyclekit/error.hpp"

namespace cyclekit {

Z2Chain Z2Chain::from_indices(std::size_t universe,
                              std::span<const std::uint32_t> indices) {
    Z2Chain c(universe);
    for (std::uint32_t i : indices) {
        if (i >= universe) throw DimensionError("chain index out of universe");
        c.set(i);
    }
    return c;
}

std::size_t Z2Chain::popcount() const {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

bool Z2Chain::empty() const {
    for (std::uint64_t w : words_)
        if (w) return false;
    return true;
}

Z2Chain& Z2Chain::operator^=(const Z2Chain& o) {
    if (universe_ != o.universe_)
        throw DimensionError("chain universes differ in mod-2 addition");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
}

std::vector<std::uint32_t> Z2Chain::indices() const {
    std::vector<std::uint32_t> out;
    out.reserve(popcount());
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t bits = words_[w];
        while (bits) {
            int b = std::countr_zero(bits);
            out.push_back(static_cast<std::uint32_t>(w * 64 + b));
            bits &= bits - 1;
        }
    }
    return out;
}

BoundaryMatrix::BoundaryMatrix(
    std::size_t num_vertices,
    std::vector<std::pair<EntityId, EntityId>> endpoints)
    : num_vertices_(num_vertices), endpoints_(std::move(endpoints)) {
    for (const auto& [u, v] : endpoints_) {
        if (u >= num_vertices_ || v >= num_vertices_)
            throw DimensionError("edge endpoint out of vertex range");
        if (u == v) throw DimensionError("boundary of a self-loop is undefined here");
    }
}

Z2Chain BoundaryMatrix::apply(const Z2Chain& chain) const {
    if (chain.universe() != endpoints_.size())
        throw DimensionError("chain universe does not match edge count");
    Z2Chain out(num_vertices_);
    // Each selected edge toggles both endpoints; vertices hit an even number
    // of times cancel, which is exactly the mod-2 boundary.
    for (std::uint32_t e : chain.indices()) {
        out.flip(endpoints_[e].first);
        out.flip(endpoints_[e].second);
    }
    return out;
}

BoundaryMatrix boundary_matrix(const KnowledgeGraph& g) {
    std::vector<std::pair<EntityId, EntityId>> endpoints;
    endpoints.reserve(g.num_edges());
    for (const Triplet& t : g.triplets()) endpoints.emplace_back(t.head, t.tail);
    return BoundaryMatrix(g.num_entities(), std::move(endpoints));
}

Z2Chain apply_boundary(const BoundaryMatrix& m, const Z2Chain& chain) {
    return m.apply(chain);
}

bool is_cycle(const BoundaryMatrix& m, const Z2Chain& chain) {
    return m.is_cycle(chain);
}

std::size_t betti_number(const KnowledgeGraph& g) {
    Components comp = connected_components(g);
    return g.num_edges() + static_cast<std::size_t>(comp.count) -
           g.num_entities();
}

std::size_t z2_rank(std::span<const Z2Chain> chains) {
    // Row reduction with pivot = lowest set bit of each reduced row.
    std::vector<Z2Chain> rows;
    std::vector<std::uint32_t> pivots;
    for (const Z2Chain& c : chains) {
        Z2Chain r = c;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (r.test(pivots[i])) r ^= rows[i];
        if (r.empty()) continue;
        pivots.push_back(r.indices().front());
        rows.push_back(std::move(r));
    }
    return rows.size();
}

std::optional<Z2Chain> solve_in_span(std::span<const Z2Chain> basis,
                                     const Z2Chain& target) {
    // Eliminate while tracking, per stored row, which basis elements were
    // combined into it. Reducing the target by the same rows then yields its
    // coefficients directly.
    std::vector<Z2Chain> rows;
    std::vector<Z2Chain> combo;  // over universe basis.size()
    std::vector<std::uint32_t> pivots;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        Z2Chain r = basis[j];
        Z2Chain c(basis.size());
        c.set(j);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (r.test(pivots[i])) {
                r ^= rows[i];
                c ^= combo[i];
            }
        if (r.empty()) continue;  // dependent element, contributes nothing new
        pivots.push_back(r.indices().front());
        rows.push_back(std::move(r));
        combo.push_back(std::move(c));
    }

    Z2Chain rem = target;
    Z2Chain coeff(basis.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rem.test(pivots[i])) {
            rem ^= rows[i];
            coeff ^= combo[i];
        }
    if (!rem.empty()) return std::nullopt;
    return coeff;
}

}  // namespace cyclekit
