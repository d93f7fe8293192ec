// Tests for the structured random dataset generator: determinism, the
// inductive split contract (fresh entities, shared relations), the planted
// composition rules, and the community/backbone structure.

#include <algorithm>
#include <set>
#include <string>
#include <tuple>

#include <doctest.h>

#include "cyclekit/error.hpp"
#include "cyclekit/kg.hpp"
#include "cyclekit/synthetic.hpp"

using namespace cyclekit;

namespace {

SyntheticConfig small_config(std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.communities = 4;
    cfg.entities_per_community = 6;
    cfg.base_relations = 3;
    cfg.rules = 2;
    cfg.rule_instances = 40;
    cfg.noise_edges = 6;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("synthetic generation is deterministic in the seed") {
    auto a = make_synthetic(small_config(11));
    auto b = make_synthetic(small_config(11));
    CHECK(structural_hash(a.train) == structural_hash(b.train));
    CHECK(structural_hash(a.test) == structural_hash(b.test));
    CHECK(a.train.entity_names() == b.train.entity_names());

    auto c = make_synthetic(small_config(12));
    CHECK(structural_hash(a.train) != structural_hash(c.train));
}

TEST_CASE("splits share relations and use disjoint entity vocabularies") {
    auto data = make_synthetic(small_config(3));
    CHECK(data.train.relation_names() == data.test.relation_names());
    CHECK(data.train.num_relations() == 3 + 2);  // bases then heads

    for (const auto& name : data.train.entity_names())
        CHECK(name.front() == 'a');
    for (const auto& name : data.test.entity_names())
        CHECK(name.front() == 'q');

    // Head relations come after the base block, in rule order.
    CHECK(data.train.relation_names()[0] == "b0");
    CHECK(data.train.relation_names()[3] == "h0");
    CHECK(data.train.relation_names()[4] == "h1");
}

TEST_CASE("every planted head edge is explained by its composition rule") {
    auto cfg = small_config(21);
    auto data = make_synthetic(cfg);
    const std::size_t B = cfg.base_relations;

    for (const KnowledgeGraph* g : {&data.train, &data.test}) {
        std::size_t heads_seen = 0;
        for (const Triplet& trip : g->triplets()) {
            if (trip.relation < B) continue;
            ++heads_seen;
            const std::size_t rule = trip.relation - B;
            const auto b1 = static_cast<RelationId>(rule % B);
            const auto b2 = static_cast<RelationId>((rule + 1) % B);
            bool explained = false;
            for (EntityId x = 0; x < g->num_entities() && !explained; ++x)
                explained = g->contains(x, b1, trip.head) &&
                            g->contains(x, b2, trip.tail);
            CHECK(explained);
        }
        CHECK(heads_seen > 0);
    }
}

TEST_CASE("both splits are connected and free of duplicates or loops") {
    auto data = make_synthetic(small_config(5));
    for (const KnowledgeGraph* g : {&data.train, &data.test}) {
        CHECK(connected_components(*g).count == 1);

        std::set<std::tuple<EntityId, RelationId, EntityId>> seen;
        for (const Triplet& trip : g->triplets()) {
            CHECK(trip.head != trip.tail);
            CHECK(seen.insert({trip.head, trip.relation, trip.tail}).second);
        }
    }
}

TEST_CASE("edges stay mostly inside their community") {
    SyntheticConfig cfg;  // defaults: 10 communities of 12
    cfg.seed = 9;
    auto data = make_synthetic(cfg);

    auto community = [&](EntityId v) { return v / cfg.entities_per_community; };
    std::size_t intra = 0;
    for (const Triplet& trip : data.train.triplets())
        if (community(trip.head) == community(trip.tail)) ++intra;
    const double frac =
        static_cast<double>(intra) /
        static_cast<double>(data.train.num_edges());
    CHECK(frac > 0.8);

    // The anchor ring that keeps communities attached must be present.
    for (std::size_t c = 0; c + 1 < cfg.communities; ++c)
        CHECK(data.train.contains(
            static_cast<EntityId>(c * cfg.entities_per_community), 0,
            static_cast<EntityId>((c + 1) * cfg.entities_per_community)));
}

TEST_CASE("generator rejects degenerate configurations") {
    SyntheticConfig cfg = small_config(1);
    cfg.communities = 0;
    CHECK_THROWS_AS(make_synthetic(cfg), ConfigError);

    cfg = small_config(1);
    cfg.base_relations = 0;
    CHECK_THROWS_AS(make_synthetic(cfg), ConfigError);

    cfg = small_config(1);
    cfg.entities_per_community = 1;
    CHECK_THROWS_AS(make_synthetic(cfg), ConfigError);

    cfg = small_config(1);
    cfg.intra_community = 1.5;
    CHECK_THROWS_AS(make_synthetic(cfg), ConfigError);
}
