#include "cyclekit/kg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "cyclekit/error.hpp"
#include "cyclekit/rng.hpp"

namespace cyclekit {

namespace {

std::uint64_t triplet_key(EntityId h, RelationId r, EntityId t) {
    std::uint64_t x = splitmix64(h);
    x = splitmix64(x ^ (static_cast<std::uint64_t>(r) << 1));
    x = splitmix64(x ^ (static_cast<std::uint64_t>(t) << 2));
    return x;
}

}  // namespace

KnowledgeGraph::KnowledgeGraph(std::vector<std::string> entity_names,
                               std::vector<std::string> relation_names,
                               std::vector<Triplet> triplets)
    : entity_names_(std::move(entity_names)),
      relation_names_(std::move(relation_names)),
      triplets_(std::move(triplets)) {
    for (std::size_t i = 0; i < triplets_.size(); ++i) {
        Triplet& t = triplets_[i];
        if (t.head >= entity_names_.size() || t.tail >= entity_names_.size())
            throw DimensionError("triplet endpoint out of entity range");
        if (t.relation >= relation_names_.size())
            throw DimensionError("triplet relation out of vocabulary range");
        if (t.head == t.tail)
            throw Error("self-loop triplet passed to KnowledgeGraph");
        t.edge_id = static_cast<EdgeId>(i);
    }
    rebuild_index();
}

void KnowledgeGraph::rebuild_index() {
    entity_index_.clear();
    relation_index_.clear();
    edge_index_.clear();
    entity_index_.reserve(entity_names_.size());
    for (std::size_t i = 0; i < entity_names_.size(); ++i)
        entity_index_.emplace(entity_names_[i], static_cast<EntityId>(i));
    for (std::size_t i = 0; i < relation_names_.size(); ++i)
        relation_index_.emplace(relation_names_[i], static_cast<RelationId>(i));

    std::vector<std::size_t> deg(entity_names_.size(), 0);
    for (const Triplet& t : triplets_) {
        ++deg[t.head];
        ++deg[t.tail];
    }
    adj_offset_.assign(entity_names_.size() + 1, 0);
    for (std::size_t v = 0; v < deg.size(); ++v)
        adj_offset_[v + 1] = adj_offset_[v] + deg[v];
    adj_flat_.assign(adj_offset_.back(), kNoEdge);
    std::vector<std::size_t> cursor(adj_offset_.begin(), adj_offset_.end() - 1);
    // Edges visited in id order, so every per-vertex list ends up ascending.
    for (const Triplet& t : triplets_) {
        adj_flat_[cursor[t.head]++] = t.edge_id;
        adj_flat_[cursor[t.tail]++] = t.edge_id;
    }

    edge_index_.reserve(triplets_.size());
    for (const Triplet& t : triplets_)
        edge_index_[triplet_key(t.head, t.relation, t.tail)].push_back(t.edge_id);
}

const std::vector<Triplet>& KnowledgeGraph::extended_triplets() const {
    if (extended_.empty() && !triplets_.empty())
        throw Error("extended triplets requested before extend_with_inverses");
    return extended_;
}

RelationId KnowledgeGraph::traversal_token(EdgeId e, EntityId from) const {
    const Triplet& t = triplets_[e];
    if (from == t.head) return t.relation;
    if (from == t.tail) return inverse_relation(t.relation);
    throw DimensionError("traversal_token: vertex not an endpoint of edge");
}

RelationId KnowledgeGraph::inverse_relation(RelationId r) const {
    std::size_t n = num_relations();
    return r < n ? static_cast<RelationId>(r + n)
                 : static_cast<RelationId>(r - n);
}

std::span<const EdgeId> KnowledgeGraph::adjacency(EntityId v) const {
    return {adj_flat_.data() + adj_offset_[v],
            adj_offset_[v + 1] - adj_offset_[v]};
}

EntityId KnowledgeGraph::other_endpoint(EdgeId e, EntityId v) const {
    const Triplet& t = triplets_[e];
    if (v == t.head) return t.tail;
    if (v == t.tail) return t.head;
    throw DimensionError("other_endpoint: vertex not an endpoint of edge");
}

const std::string& KnowledgeGraph::relation_name(RelationId r) const {
    // Inverse ids have no stored name; report them as <name>^-1.
    static thread_local std::string scratch;
    if (r < relation_names_.size()) return relation_names_[r];
    scratch = relation_names_[r - relation_names_.size()] + "^-1";
    return scratch;
}

std::optional<EntityId> KnowledgeGraph::find_entity(const std::string& name) const {
    auto it = entity_index_.find(name);
    if (it == entity_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(const std::string& name) const {
    auto it = relation_index_.find(name);
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
}

bool KnowledgeGraph::contains(EntityId h, RelationId r, EntityId t) const {
    return find_edge(h, r, t).has_value();
}

std::optional<EdgeId> KnowledgeGraph::find_edge(EntityId h, RelationId r,
                                                EntityId t) const {
    auto it = edge_index_.find(triplet_key(h, r, t));
    if (it == edge_index_.end()) return std::nullopt;
    for (EdgeId e : it->second) {
        const Triplet& c = triplets_[e];
        if (c.head == h && c.relation == r && c.tail == t) return e;
    }
    return std::nullopt;
}

KnowledgeGraph extend_with_inverses(const KnowledgeGraph& g) {
    if (g.has_inverses())
        throw Error("extend_with_inverses: graph already extended");
    KnowledgeGraph out = g;
    out.extended_ = g.triplets();
    out.extended_.reserve(2 * g.num_edges());
    for (const Triplet& t : g.triplets()) {
        Triplet inv;
        inv.head = t.tail;
        inv.relation = g.inverse_relation(t.relation);
        inv.tail = t.head;
        inv.edge_id = t.edge_id;  // same undirected edge
        out.extended_.push_back(inv);
    }
    return out;
}

namespace {

struct SplitLine {
    std::string head, relation, tail;
};

bool parse_line(const std::string& raw, SplitLine& out) {
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) return false;  // blank lines are skipped silently

    std::size_t a = line.find('\t');
    std::size_t b = a == std::string::npos ? std::string::npos
                                           : line.find('\t', a + 1);
    if (a == std::string::npos || b == std::string::npos ||
        line.find('\t', b + 1) != std::string::npos)
        throw Error("expected exactly three tab-separated fields");
    out.head = line.substr(0, a);
    out.relation = line.substr(a + 1, b - a - 1);
    out.tail = line.substr(b + 1);
    if (out.head.empty() || out.relation.empty() || out.tail.empty())
        throw Error("empty field");
    return true;
}

}  // namespace

KnowledgeGraph load_split(const std::filesystem::path& file,
                          const std::vector<std::string>* fixed_relations) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());

    std::vector<std::string> entities;
    std::unordered_map<std::string, EntityId> entity_ids;
    std::vector<std::string> relations;
    std::unordered_map<std::string, RelationId> relation_ids;
    if (fixed_relations) {
        relations = *fixed_relations;
        for (std::size_t i = 0; i < relations.size(); ++i)
            relation_ids.emplace(relations[i], static_cast<RelationId>(i));
    }

    // Self-loop lines are dropped entirely: their entity names are not
    // interned, so an entity seen only in self-loops does not exist.
    std::size_t self_loops = 0;
    std::vector<Triplet> triplets;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        SplitLine f;
        try {
            if (!parse_line(raw, f)) continue;
        } catch (const Error& e) {
            throw ParseError(file.string(), line_no, e.what());
        }
        if (f.head == f.tail) {
            ++self_loops;
            continue;
        }
        auto intern_entity = [&](const std::string& name) {
            auto [it, inserted] =
                entity_ids.emplace(name, static_cast<EntityId>(entities.size()));
            if (inserted) entities.push_back(name);
            return it->second;
        };
        RelationId r;
        auto rit = relation_ids.find(f.relation);
        if (rit != relation_ids.end()) {
            r = rit->second;
        } else if (fixed_relations) {
            throw UnknownRelationError(f.relation);
        } else {
            r = static_cast<RelationId>(relations.size());
            relation_ids.emplace(f.relation, r);
            relations.push_back(f.relation);
        }
        Triplet t;
        t.head = intern_entity(f.head);
        t.relation = r;
        t.tail = intern_entity(f.tail);
        triplets.push_back(t);
    }

    KnowledgeGraph g(std::move(entities), std::move(relations),
                     std::move(triplets));
    g.set_self_loops_skipped(self_loops);
    return g;
}

DatasetSplits load_dataset(const std::filesystem::path& dir) {
    DatasetSplits out;
    out.train = load_split(dir / "train.txt", nullptr);
    std::vector<std::string> vocab = out.train.relation_names();
    out.test = load_split(dir / "test.txt", &vocab);
    return out;
}

void save_split(const KnowledgeGraph& g, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    for (const Triplet& t : g.triplets())
        out << g.entity_name(t.head) << '\t' << g.relation_name(t.relation)
            << '\t' << g.entity_name(t.tail) << '\n';
    if (!out) throw IoError("write failed for " + file.string());
}

namespace {

// Minimal JSON string escaping: quotes, backslashes, and control characters.
std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    return out;
}

}  // namespace

void save_targets(const KnowledgeGraph& g, const TargetSet& targets,
                  const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    for (std::size_t i = 0; i < targets.targets.size(); ++i) {
        const Triplet& t = targets.targets[i];
        out << "{\"head\":\"" << json_escape(g.entity_name(t.head))
            << "\",\"relation\":\"" << json_escape(g.relation_name(t.relation))
            << "\",\"tail\":\"" << json_escape(g.entity_name(t.tail))
            << "\",\"label\":" << int(targets.labels[i]) << "}\n";
    }
    if (!out) throw IoError("write failed for " + file.string());
}

TargetSet sample_negatives(const KnowledgeGraph& g,
                           std::span<const Triplet> positives,
                           std::size_t ratio, std::uint64_t seed) {
    TargetSet set;
    set.seed = seed;
    set.negatives_per_positive = ratio;
    set.targets.reserve(positives.size() * (1 + ratio));
    set.labels.reserve(positives.size() * (1 + ratio));

    struct KeyHash {
        std::size_t operator()(const std::array<std::uint32_t, 3>& k) const {
            return triplet_key(k[0], k[1], k[2]);
        }
    };
    std::unordered_set<std::array<std::uint32_t, 3>, KeyHash> used;
    used.reserve(positives.size() * (1 + ratio));
    for (const Triplet& p : positives)
        used.insert({p.head, p.relation, p.tail});

    Rng rng(derive_seed(seed, 0x6e65676174697665ULL));
    const std::uint64_t budget = 10 * static_cast<std::uint64_t>(g.num_entities());
    const auto n_entities = static_cast<std::uint64_t>(g.num_entities());

    for (const Triplet& p : positives) {
        set.targets.push_back(p);
        set.labels.push_back(1);
        for (std::size_t s = 0; s < ratio; ++s) {
            bool accepted = false;
            for (std::uint64_t attempt = 0; attempt < budget; ++attempt) {
                Triplet c = p;
                c.edge_id = kNoEdge;
                EntityId repl = static_cast<EntityId>(rng.below(n_entities));
                if (rng.coin())
                    c.head = repl;
                else
                    c.tail = repl;
                if (c.head == c.tail) continue;
                if (g.contains(c.head, c.relation, c.tail)) continue;
                if (!used.insert({c.head, c.relation, c.tail}).second) continue;
                set.targets.push_back(c);
                set.labels.push_back(0);
                accepted = true;
                break;
            }
            if (!accepted)
                throw SamplingError(
                    "negative sampling exhausted its retry budget (" +
                    std::to_string(budget) + " draws per slot)");
        }
    }
    return set;
}

WorkingGraph add_targets_to_graph(const KnowledgeGraph& g,
                                  const TargetSet& targets) {
    WorkingGraph out;
    out.target_edges.resize(targets.targets.size(), kNoEdge);

    // Duplicate positives (parallel edges with equal h, r, t) each consume a
    // distinct matching edge, in edge-id order.
    std::unordered_map<std::uint64_t, std::vector<EdgeId>> pool;
    for (const Triplet& t : g.triplets())
        pool[triplet_key(t.head, t.relation, t.tail)].push_back(t.edge_id);
    std::unordered_map<std::uint64_t, std::size_t> cursor;

    std::vector<Triplet> triplets = g.triplets();
    for (std::size_t i = 0; i < targets.targets.size(); ++i) {
        const Triplet& t = targets.targets[i];
        if (targets.labels[i]) {
            std::uint64_t key = triplet_key(t.head, t.relation, t.tail);
            auto it = pool.find(key);
            EdgeId found = kNoEdge;
            if (it != pool.end()) {
                std::size_t& c = cursor[key];
                while (c < it->second.size()) {
                    EdgeId e = it->second[c++];
                    const Triplet& cand = g.triplet(e);
                    if (cand.head == t.head && cand.relation == t.relation &&
                        cand.tail == t.tail) {
                        found = e;
                        break;
                    }
                }
            }
            if (found == kNoEdge)
                throw Error("positive target is not an edge of the graph");
            out.target_edges[i] = found;
        } else {
            Triplet fresh = t;
            fresh.edge_id = static_cast<EdgeId>(triplets.size());
            out.target_edges[i] = fresh.edge_id;
            triplets.push_back(fresh);
        }
    }

    out.graph = KnowledgeGraph(g.entity_names(), g.relation_names(),
                               std::move(triplets));
    out.graph.set_self_loops_skipped(g.self_loops_skipped());
    return out;
}

Components connected_components(const KnowledgeGraph& g) {
    std::size_t n = g.num_entities();
    std::vector<EntityId> parent(n);
    for (std::size_t v = 0; v < n; ++v) parent[v] = static_cast<EntityId>(v);
    auto find = [&](EntityId v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };
    for (const Triplet& t : g.triplets()) {
        EntityId a = find(t.head), b = find(t.tail);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }

    Components comp;
    comp.label.assign(n, -1);
    // Roots are the minimum members, so scanning vertices in ascending order
    // numbers components by smallest member.
    for (std::size_t v = 0; v < n; ++v) {
        EntityId r = find(static_cast<EntityId>(v));
        if (comp.label[r] < 0) {
            comp.label[r] = comp.count++;
            comp.members.emplace_back();
        }
        comp.label[v] = comp.label[r];
        comp.members[comp.label[v]].push_back(static_cast<EntityId>(v));
    }
    return comp;
}

std::uint64_t structural_hash(const KnowledgeGraph& g) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(g.num_entities());
    mix(g.num_relations());
    mix(g.num_edges());
    for (const Triplet& t : g.triplets()) {
        mix(t.head);
        mix(t.relation);
        mix(t.tail);
    }
    return h;
}

}  // namespace cyclekit
