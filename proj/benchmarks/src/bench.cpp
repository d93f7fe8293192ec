// Microbenchmarks for the hot paths: Z2 elimination, tree-basis
// construction, full instance preparation, and the forward pass.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "cyclekit/kg.hpp"
#include "cyclekit/model.hpp"
#include "cyclekit/pipeline.hpp"
#include "cyclekit/rng.hpp"
#include "cyclekit/spt.hpp"
#include "cyclekit/synthetic.hpp"
#include "cyclekit/z2.hpp"

namespace {

using namespace cyclekit;

KnowledgeGraph random_graph(std::uint64_t seed, std::size_t n,
                            std::size_t extra) {
    Rng rng(seed);
    std::vector<std::string> ents, rels;
    for (std::size_t i = 0; i < n; ++i) ents.push_back("e" + std::to_string(i));
    for (std::size_t i = 0; i < 4; ++i) rels.push_back("r" + std::to_string(i));
    std::vector<Triplet> ts;
    for (std::size_t v = 1; v < n; ++v)
        ts.push_back({static_cast<EntityId>(rng.below(v)),
                      static_cast<RelationId>(rng.below(4)),
                      static_cast<EntityId>(v), kNoEdge});
    for (std::size_t i = 0; i < extra; ++i) {
        EntityId a = static_cast<EntityId>(rng.below(n));
        EntityId b = static_cast<EntityId>(rng.below(n));
        while (b == a) b = static_cast<EntityId>(rng.below(n));
        ts.push_back({a, static_cast<RelationId>(rng.below(4)), b, kNoEdge});
    }
    return KnowledgeGraph(std::move(ents), std::move(rels), std::move(ts));
}

void BM_z2_rank(benchmark::State& state) {
    const std::size_t universe = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    std::vector<Z2Chain> chains;
    for (std::size_t i = 0; i < universe / 2; ++i) {
        Z2Chain c(universe);
        for (std::size_t b = 0; b < universe; ++b)
            if (rng.below(3) == 0) c.set(b);
        chains.push_back(std::move(c));
    }
    for (auto _ : state) benchmark::DoNotOptimize(z2_rank(chains));
}
BENCHMARK(BM_z2_rank)->Arg(128)->Arg(512)->Arg(2048);

void BM_basis_construction(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    auto g = random_graph(11, n, 2 * n);
    for (auto _ : state) benchmark::DoNotOptimize(build_all_bases(g, 5, 3));
}
BENCHMARK(BM_basis_construction)->Arg(100)->Arg(400)->Arg(1600);

void BM_prepare_instance(benchmark::State& state) {
    SyntheticConfig cfg;
    cfg.seed = 9;
    auto data = make_synthetic(cfg);
    auto targets =
        sample_negatives(data.train, data.train.triplets(), 1, 21);
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            prepare_instance(data.train, targets, k, 2, 3));
}
BENCHMARK(BM_prepare_instance)->Arg(1)->Arg(5)->Arg(20);

void BM_model_forward(benchmark::State& state) {
    SyntheticConfig cfg;
    cfg.seed = 9;
    auto data = make_synthetic(cfg);
    auto targets =
        sample_negatives(data.train, data.train.triplets(), 1, 21);
    const std::size_t k = static_cast<std::size_t>(state.range(0));
    auto inst = prepare_instance(data.train, targets, k, 2, 3);
    ModelConfig mcfg;
    mcfg.num_relations = data.train.num_relations();
    mcfg.num_bases = k;
    auto params = ModelParams::init(mcfg, 5);
    DropoutPlan off;
    for (auto _ : state)
        benchmark::DoNotOptimize(model_forward(params, inst, off, nullptr));
}
BENCHMARK(BM_model_forward)->Arg(1)->Arg(5)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
