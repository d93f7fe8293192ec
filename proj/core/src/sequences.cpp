#include "cyclekit/sequences.hpp"

#include <array>
#include <unordered_map>

#include "cyclekit/error.hpp"
#include "cyclekit/rng.hpp"

namespace cyclekit {

std::pair<RelationSequence, RelationSequence> cycle_sequences(
    const Z2Chain& cycle, EdgeId start_edge, const KnowledgeGraph& g) {
    std::vector<std::uint32_t> edges = cycle.indices();
    if (edges.size() < 2)
        throw MalformedCycleError("cycle has fewer than two edges");
    if (!cycle.test(start_edge))
        throw MalformedCycleError("start edge is not part of the cycle");

    // Incident edges per touched vertex; more than two means the chain is
    // not a simple loop.
    std::unordered_map<EntityId, std::array<EdgeId, 2>> incident;
    incident.reserve(edges.size());
    for (std::uint32_t e : edges) {
        const Triplet& t = g.triplet(e);
        for (EntityId v : {t.head, t.tail}) {
            auto [it, fresh] = incident.emplace(v, std::array<EdgeId, 2>{e, kNoEdge});
            if (!fresh) {
                if (it->second[1] != kNoEdge)
                    throw MalformedCycleError(
                        "vertex with more than two incident cycle edges");
                it->second[1] = e;
            }
        }
    }
    for (const auto& [v, inc] : incident)
        if (inc[1] == kNoEdge)
            throw MalformedCycleError("vertex with a single incident cycle edge");

    RelationSequence s1;
    s1.start_edge = start_edge;
    s1.tokens.reserve(edges.size());

    const Triplet& anchor = g.triplet(start_edge);
    EntityId origin = anchor.head;
    EntityId cur = anchor.tail;
    EdgeId prev = start_edge;
    s1.tokens.push_back(anchor.relation);  // anchor walked head to tail

    while (cur != origin) {
        const auto& inc = incident.at(cur);
        EdgeId next = inc[0] == prev ? inc[1] : inc[0];
        s1.tokens.push_back(g.traversal_token(next, cur));
        cur = g.other_endpoint(next, cur);
        prev = next;
    }
    if (s1.tokens.size() != edges.size())
        throw MalformedCycleError("chain is a disjoint union of loops");

    RelationSequence s2;
    s2.start_edge = start_edge;
    s2.tokens = reverse_rotation(s1.tokens, g.num_relations());
    return {std::move(s1), std::move(s2)};
}

std::vector<RelationId> reverse_rotation(const std::vector<RelationId>& s1,
                                         std::size_t num_relations) {
    auto inv = [num_relations](RelationId r) {
        return r < num_relations
                   ? static_cast<RelationId>(r + num_relations)
                   : static_cast<RelationId>(r - num_relations);
    };
    std::vector<RelationId> out;
    out.reserve(s1.size());
    out.push_back(inv(s1[0]));
    for (std::size_t i = s1.size(); i > 1; --i) out.push_back(inv(s1[i - 1]));
    return out;
}

std::size_t SequenceTable::VecHash::operator()(
    const std::vector<RelationId>& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ v.size();
    for (RelationId r : v) h = splitmix64(h ^ r);
    return static_cast<std::size_t>(h);
}

std::uint32_t SequenceTable::intern(std::vector<RelationId> tokens) {
    ++total_references_;
    auto it = index_.find(tokens);
    if (it != index_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(tokens_.size());
    index_.emplace(tokens, id);
    tokens_.push_back(std::move(tokens));
    return id;
}

}  // namespace cyclekit
