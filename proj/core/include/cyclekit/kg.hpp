#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace cyclekit {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();
inline constexpr EntityId kNoEntity = std::numeric_limits<EntityId>::max();

struct Triplet {
    EntityId head = 0;
    RelationId relation = 0;
    EntityId tail = 0;
    EdgeId edge_id = kNoEdge;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Undirected multigraph over entities, with a directed triplet stored per
// edge. Edge ids are dense indices into triplets(). Parallel edges are kept;
// self-loops are rejected at construction.
//
// After extend_with_inverses() the graph also exposes extended_triplets():
// the original list followed by one inverse triplet per edge. Inverse
// relation ids live in [R, 2R) where R = num_relations(); an inverse triplet
// shares the edge_id of its forward twin because both name the same
// undirected edge.
class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    KnowledgeGraph(std::vector<std::string> entity_names,
                   std::vector<std::string> relation_names,
                   std::vector<Triplet> triplets);

    std::size_t num_entities() const { return entity_names_.size(); }
    std::size_t num_edges() const { return triplets_.size(); }
    std::size_t num_relations() const { return relation_names_.size(); }

    const std::vector<Triplet>& triplets() const { return triplets_; }
    const Triplet& triplet(EdgeId e) const { return triplets_[e]; }

    bool has_inverses() const { return !extended_.empty(); }
    // Original triplets followed by their inverses; requires has_inverses().
    const std::vector<Triplet>& extended_triplets() const;

    // Relation id of edge e when traversed from `from` to the far endpoint:
    // the stored relation when from == head, its inverse otherwise.
    RelationId traversal_token(EdgeId e, EntityId from) const;
    RelationId inverse_relation(RelationId r) const;
    std::size_t num_extended_relations() const { return 2 * num_relations(); }

    // Edge ids incident to v, ascending. A parallel edge appears once per
    // endpoint list; self-loops cannot occur.
    std::span<const EdgeId> adjacency(EntityId v) const;
    EntityId other_endpoint(EdgeId e, EntityId v) const;
    std::size_t degree(EntityId v) const { return adjacency(v).size(); }

    const std::vector<std::string>& entity_names() const { return entity_names_; }
    const std::vector<std::string>& relation_names() const { return relation_names_; }
    const std::string& entity_name(EntityId v) const { return entity_names_[v]; }
    const std::string& relation_name(RelationId r) const;

    std::optional<EntityId> find_entity(const std::string& name) const;
    std::optional<RelationId> find_relation(const std::string& name) const;

    // True if some edge stores exactly (h, r, t) in this orientation.
    bool contains(EntityId h, RelationId r, EntityId t) const;
    std::optional<EdgeId> find_edge(EntityId h, RelationId r, EntityId t) const;

    // Self-loop lines dropped while loading the split this graph came from.
    std::size_t self_loops_skipped() const { return self_loops_skipped_; }
    void set_self_loops_skipped(std::size_t n) { self_loops_skipped_ = n; }

private:
    friend KnowledgeGraph extend_with_inverses(const KnowledgeGraph&);

    void rebuild_index();

    std::vector<std::string> entity_names_;
    std::vector<std::string> relation_names_;
    std::vector<Triplet> triplets_;
    std::vector<Triplet> extended_;
    std::vector<EdgeId> adj_flat_;
    std::vector<std::size_t> adj_offset_;
    std::unordered_map<std::string, EntityId> entity_index_;
    std::unordered_map<std::string, RelationId> relation_index_;
    std::unordered_map<std::uint64_t, std::vector<EdgeId>> edge_index_;
    std::size_t self_loops_skipped_ = 0;
};

struct DatasetSplits {
    KnowledgeGraph train;
    KnowledgeGraph test;
};

// Load <dir>/train.txt and <dir>/test.txt. Lines are head\trelation\ttail.
// Entity vocabularies are split-local, assigned by first occurrence in file
// order; the relation vocabulary is read from train and is binding for test
// (UnknownRelationError otherwise). Self-loop lines are skipped and counted;
// duplicate lines are kept as parallel edges.
DatasetSplits load_dataset(const std::filesystem::path& dir);

// Load one split file. When fixed_relations is non-null the relation
// vocabulary is taken as-is and unseen relation strings raise
// UnknownRelationError; otherwise relations get ids by first occurrence.
KnowledgeGraph load_split(const std::filesystem::path& file,
                          const std::vector<std::string>* fixed_relations);

// Write triplets as head\trelation\ttail lines in edge-id order. Reloading
// the file reproduces identical ids, so save followed by load round-trips.
void save_split(const KnowledgeGraph& g, const std::filesystem::path& file);

// Returns a copy whose extended_triplets() view is populated. The input must
// not have been extended already.
KnowledgeGraph extend_with_inverses(const KnowledgeGraph& g);

struct TargetSet;

// Write a target set as JSON lines {"head","relation","tail","label"}, one
// object per target in target order, names resolved through the graph's
// vocabularies and escaped per JSON rules.
void save_targets(const KnowledgeGraph& g, const TargetSet& targets,
                  const std::filesystem::path& file);

// Labeled triplet collection for scoring. Layout groups each positive with
// the negatives sampled for it: [pos_0, neg_0_0 .. neg_0_{r-1}, pos_1, ...].
struct TargetSet {
    std::vector<Triplet> targets;
    std::vector<std::uint8_t> labels;
    std::size_t negatives_per_positive = 0;
    std::uint64_t seed = 0;
};

// For every positive draw `ratio` corrupted triplets: a fair coin picks head
// or tail, the replacement entity is uniform over the vocabulary. A draw is
// rejected when the result is an edge of g, duplicates an earlier target, or
// is a self-loop. After 10 * num_entities failed draws for one slot the
// sampler gives up with SamplingError.
TargetSet sample_negatives(const KnowledgeGraph& g,
                           std::span<const Triplet> positives,
                           std::size_t ratio, std::uint64_t seed);

struct WorkingGraph {
    KnowledgeGraph graph;               // inverses not yet materialized
    std::vector<EdgeId> target_edges;   // row per target, same order as set
};

// Insert the target set into g. A positive must already be an edge and keeps
// its edge id; negatives are appended with fresh contiguous ids. The mapping
// from target index to edge id is recorded for later row lookups.
WorkingGraph add_targets_to_graph(const KnowledgeGraph& g,
                                  const TargetSet& targets);

struct Components {
    std::vector<int> label;                       // per entity, dense from 0
    std::vector<std::vector<EntityId>> members;   // ascending within each
    int count = 0;
};

// Connected components of the undirected graph. Components are numbered by
// their smallest member, ascending, so labels are stable across runs.
Components connected_components(const KnowledgeGraph& g);

// FNV-1a over the structural content (entity count, relation count, triplet
// list). Used to key cached artifacts to a dataset.
std::uint64_t structural_hash(const KnowledgeGraph& g);

}  // namespace cyclekit
