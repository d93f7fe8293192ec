#include "cyclekit/synthetic.hpp"

#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cyclekit/error.hpp"
#include "cyclekit/rng.hpp"

namespace cyclekit {

namespace {

struct SplitBuilder {
    const SyntheticConfig& cfg;
    Rng rng;
    std::set<std::tuple<EntityId, RelationId, EntityId>> seen;
    std::vector<Triplet> triplets;

    std::size_t num_entities() const {
        return cfg.communities * cfg.entities_per_community;
    }

    EntityId community_member(std::size_t community) {
        return static_cast<EntityId>(community * cfg.entities_per_community +
                                     rng.below(cfg.entities_per_community));
    }

    EntityId partner(EntityId x) {
        // Mostly inside x's community; the rest lands anywhere.
        if (rng.real() < cfg.intra_community)
            return community_member(x / cfg.entities_per_community);
        return static_cast<EntityId>(rng.below(num_entities()));
    }

    void add(EntityId h, RelationId r, EntityId t) {
        if (h == t) return;
        if (!seen.emplace(h, r, t).second) return;
        triplets.push_back({h, r, t, kNoEdge});
    }

    void build() {
        // Deterministic backbone: a spine through each community plus a ring
        // of community anchors. Every entity is attached, the split is
        // connected, and almost all backbone edges are intra-community.
        for (std::size_t c = 0; c < cfg.communities; ++c) {
            EntityId anchor =
                static_cast<EntityId>(c * cfg.entities_per_community);
            for (std::size_t j = 1; j < cfg.entities_per_community; ++j)
                add(anchor + static_cast<EntityId>(j),
                    static_cast<RelationId>(j % cfg.base_relations),
                    anchor + static_cast<EntityId>(j - 1));
        }
        for (std::size_t c = 0; c + 1 < cfg.communities; ++c)
            add(static_cast<EntityId>(c * cfg.entities_per_community), 0,
                static_cast<EntityId>((c + 1) * cfg.entities_per_community));
        if (cfg.communities > 2)
            add(static_cast<EntityId>((cfg.communities - 1) *
                                      cfg.entities_per_community),
                0, 0);

        const RelationId head_base =
            static_cast<RelationId>(cfg.base_relations);
        for (std::size_t i = 0; i < cfg.rule_instances; ++i) {
            std::size_t rule = rng.below(cfg.rules);
            RelationId b1 =
                static_cast<RelationId>(rule % cfg.base_relations);
            RelationId b2 =
                static_cast<RelationId>((rule + 1) % cfg.base_relations);
            for (int attempt = 0; attempt < 64; ++attempt) {
                EntityId x = static_cast<EntityId>(rng.below(num_entities()));
                EntityId y = partner(x);
                EntityId z = partner(x);
                if (x == y || x == z || y == z) continue;
                add(x, b1, y);
                add(x, b2, z);
                add(y, head_base + static_cast<RelationId>(rule), z);
                break;
            }
        }

        for (std::size_t i = 0; i < cfg.noise_edges; ++i) {
            EntityId u = static_cast<EntityId>(rng.below(num_entities()));
            EntityId v = partner(u);
            if (u == v) continue;
            add(u, static_cast<RelationId>(rng.below(cfg.base_relations)), v);
        }
    }
};

KnowledgeGraph make_split(const SyntheticConfig& cfg, const std::string& prefix,
                          const std::vector<std::string>& relation_names,
                          std::uint64_t stream) {
    SplitBuilder builder{cfg, Rng(derive_seed(cfg.seed, stream)), {}, {}};
    builder.build();

    std::vector<std::string> entity_names;
    entity_names.reserve(builder.num_entities());
    for (std::size_t i = 0; i < builder.num_entities(); ++i)
        entity_names.push_back(prefix + std::to_string(i));
    return KnowledgeGraph(std::move(entity_names), relation_names,
                          std::move(builder.triplets));
}

}  // namespace

SyntheticData make_synthetic(const SyntheticConfig& cfg) {
    if (cfg.communities == 0 || cfg.entities_per_community < 3)
        throw ConfigError("synthetic communities need at least 3 entities");
    if (cfg.base_relations == 0 || cfg.rules == 0)
        throw ConfigError("synthetic data needs base relations and rules");
    if (!(cfg.intra_community >= 0.0 && cfg.intra_community <= 1.0))
        throw ConfigError("intra-community fraction must lie in [0, 1]");

    std::vector<std::string> relation_names;
    for (std::size_t b = 0; b < cfg.base_relations; ++b)
        relation_names.push_back("b" + std::to_string(b));
    for (std::size_t r = 0; r < cfg.rules; ++r)
        relation_names.push_back("h" + std::to_string(r));

    SyntheticData data;
    data.train = make_split(cfg, "a", relation_names, 0x747261696eULL);
    data.test = make_split(cfg, "q", relation_names, 0x74657374ULL);
    return data;
}

}  // namespace cyclekit
