#include "cyclekit/spt.hpp"

#include <algorithm>

#include "cyclekit/error.hpp"
#include "cyclekit/spectral.hpp"

namespace cyclekit {

SptTree build_spt(const KnowledgeGraph& g, EntityId root) {
    if (root >= g.num_entities())
        throw DimensionError("spt root out of entity range");
    SptTree tree;
    tree.root = root;
    tree.parent_edge.assign(g.num_entities(), kNoEdge);
    tree.depth.assign(g.num_entities(), -1);
    tree.depth[root] = 0;

    std::vector<EntityId> level{root};
    std::int32_t d = 0;
    while (!level.empty()) {
        ++d;
        std::vector<EntityId> next;
        for (EntityId u : level) {
            for (EdgeId e : g.adjacency(u)) {
                EntityId v = g.other_endpoint(e, u);
                if (tree.depth[v] >= 0) continue;
                tree.depth[v] = d;
                tree.parent_edge[v] = e;
                next.push_back(v);
            }
        }
        // Discovery order within a level is not sorted; the next frontier
        // must be, to keep claims deterministic.
        std::sort(next.begin(), next.end());
        level = std::move(next);
    }
    return tree;
}

namespace {

EntityId parent_vertex(const KnowledgeGraph& g, const SptTree& tree,
                       EntityId v) {
    return g.other_endpoint(tree.parent_edge[v], v);
}

}  // namespace

EntityId lca(const KnowledgeGraph& g, const SptTree& tree, EntityId u,
             EntityId v) {
    if (!tree.reached(u) || !tree.reached(v))
        throw DimensionError("lca: vertex outside the tree's component");
    while (tree.depth[u] > tree.depth[v]) u = parent_vertex(g, tree, u);
    while (tree.depth[v] > tree.depth[u]) v = parent_vertex(g, tree, v);
    while (u != v) {
        u = parent_vertex(g, tree, u);
        v = parent_vertex(g, tree, v);
    }
    return u;
}

SptCycleBasis spt_cycle_basis(const KnowledgeGraph& g, const SptTree& tree) {
    SptCycleBasis basis;
    basis.tree = tree;

    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        const Triplet& t = g.triplet(e);
        EntityId u = t.head, v = t.tail;
        if (!tree.reached(u) || !tree.reached(v)) continue;
        if (tree.parent_edge[u] == e || tree.parent_edge[v] == e) continue;

        EntityId a = lca(g, tree, u, v);
        Z2Chain cycle(g.num_edges());
        cycle.set(e);
        for (EntityId w = u; w != a; w = parent_vertex(g, tree, w))
            cycle.set(tree.parent_edge[w]);
        for (EntityId w = v; w != a; w = parent_vertex(g, tree, w))
            cycle.set(tree.parent_edge[w]);

        // The two tree paths are edge-disjoint, so the length is exact.
        std::uint32_t len = static_cast<std::uint32_t>(
            1 + (tree.depth[u] - tree.depth[a]) + (tree.depth[v] - tree.depth[a]));
        basis.cycle_length.push_back(len);
        basis.nontree_edge.push_back(e);
        basis.cycles.push_back(std::move(cycle));
    }
    return basis;
}

IncidenceMatrix::IncidenceMatrix(
    std::size_t num_edges, std::vector<std::vector<std::uint32_t>> column_edges)
    : num_edges_(num_edges) {
    col_offset_.assign(column_edges.size() + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t j = 0; j < column_edges.size(); ++j) {
        nnz += column_edges[j].size();
        col_offset_[j + 1] = nnz;
    }
    col_flat_.reserve(nnz);
    std::vector<std::size_t> row_count(num_edges_, 0);
    for (auto& col : column_edges) {
        for (std::uint32_t e : col) {
            if (e >= num_edges_)
                throw DimensionError("incidence edge id out of range");
            ++row_count[e];
        }
        col_flat_.insert(col_flat_.end(), col.begin(), col.end());
    }

    row_offset_.assign(num_edges_ + 1, 0);
    for (std::size_t e = 0; e < num_edges_; ++e)
        row_offset_[e + 1] = row_offset_[e] + row_count[e];
    row_flat_.assign(nnz, 0);
    std::vector<std::size_t> cursor(row_offset_.begin(), row_offset_.end() - 1);
    // Columns scanned ascending, so each row lists cycle indices ascending.
    for (std::size_t j = 0; j < column_edges.size(); ++j)
        for (std::uint32_t e : column_edges[j])
            row_flat_[cursor[e]++] = static_cast<std::uint32_t>(j);
}

std::span<const std::uint32_t> IncidenceMatrix::column(std::size_t j) const {
    return {col_flat_.data() + col_offset_[j],
            col_offset_[j + 1] - col_offset_[j]};
}

std::span<const std::uint32_t> IncidenceMatrix::row(std::size_t e) const {
    return {row_flat_.data() + row_offset_[e],
            row_offset_[e + 1] - row_offset_[e]};
}

IncidenceMatrix cycle_incidence_matrix(const SptCycleBasis& basis,
                                       std::size_t num_edges) {
    std::vector<std::vector<std::uint32_t>> cols;
    cols.reserve(basis.cycles.size());
    for (const Z2Chain& c : basis.cycles) cols.push_back(c.indices());
    return IncidenceMatrix(num_edges, std::move(cols));
}

std::vector<BasisBundle> build_all_bases(const KnowledgeGraph& g,
                                         std::size_t k, std::uint64_t seed) {
    std::vector<EntityId> roots = spectral_roots(g, k, seed);
    std::vector<BasisBundle> bundles(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        BasisBundle& b = bundles[i];
        b.basis = spt_cycle_basis(g, build_spt(g, roots[i]));
        b.incidence = cycle_incidence_matrix(b.basis, g.num_edges());
    }
    return bundles;
}

}  // namespace cyclekit
