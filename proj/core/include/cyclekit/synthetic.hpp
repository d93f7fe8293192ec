#pragma once

#include <cstdint>

#include "cyclekit/kg.hpp"

namespace cyclekit {

// Structured random dataset for tests and demos. Entities live in
// communities wired almost exclusively internally; triplets follow
// composition rules head_t(y, z) <- base_a(x, y) and base_b(x, z), so every
// planted head edge closes a length-3 cycle whose token pattern identifies
// the rule. The test split repeats the construction with fresh entities and
// the shared relation vocabulary, which is the inductive setting.
struct SyntheticConfig {
    std::size_t communities = 10;
    std::size_t entities_per_community = 12;
    std::size_t base_relations = 4;
    std::size_t rules = 3;
    std::size_t rule_instances = 120;  // per split
    std::size_t noise_edges = 30;      // random base-relation edges
    double intra_community = 0.95;
    std::uint64_t seed = 0;
};

struct SyntheticData {
    KnowledgeGraph train;
    KnowledgeGraph test;
};

SyntheticData make_synthetic(const SyntheticConfig& cfg);

}  // namespace cyclekit
