#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cyclekit/kg.hpp"
#include "cyclekit/z2.hpp"

namespace cyclekit {

// Relation tokens read along one rotation of a cycle. Token ids live in
// [0, 2R): an edge traversed head to tail contributes its relation id, the
// other direction contributes the inverse id (shifted by R).
struct RelationSequence {
    std::vector<RelationId> tokens;
    EdgeId start_edge = kNoEdge;
};

// Both rotations of a cycle, anchored at start_edge. The first starts by
// traversing start_edge head to tail; the second is the same loop walked the
// other way, so its tokens are the inverses of the first in reverse rotation
// order. The chain must form a single simple loop: every touched vertex has
// degree exactly 2 and the walk closes after consuming all edges, otherwise
// MalformedCycleError.
std::pair<RelationSequence, RelationSequence> cycle_sequences(
    const Z2Chain& cycle, EdgeId start_edge, const KnowledgeGraph& g);

// Second-rotation tokens derived from the first: invert the anchor, then the
// remaining tokens inverted in reverse order.
std::vector<RelationId> reverse_rotation(const std::vector<RelationId>& s1,
                                         std::size_t num_relations);

// Deduplicated store of first-rotation token lists. Cycles from different
// bases that read the same tokens share one table entry, so the encoder
// runs once per distinct sequence.
class SequenceTable {
public:
    explicit SequenceTable(std::size_t num_relations)
        : num_relations_(num_relations) {}

    std::uint32_t intern(std::vector<RelationId> tokens);

    std::size_t size() const { return tokens_.size(); }
    std::size_t num_relations() const { return num_relations_; }
    std::size_t total_references() const { return total_references_; }
    const std::vector<RelationId>& tokens(std::uint32_t id) const {
        return tokens_[id];
    }
    const std::vector<std::vector<RelationId>>& all() const { return tokens_; }

private:
    struct VecHash {
        std::size_t operator()(const std::vector<RelationId>& v) const;
    };

    std::size_t num_relations_;
    std::size_t total_references_ = 0;
    std::vector<std::vector<RelationId>> tokens_;
    std::unordered_map<std::vector<RelationId>, std::uint32_t, VecHash> index_;
};

}  // namespace cyclekit
