#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cyclekit/model.hpp"
#include "cyclekit/spt.hpp"

namespace cyclekit {

// Model checkpoint: a self-describing versioned binary container holding the
// configuration, the run seed, and every parameter tensor as (name, shape,
// row-major 64-bit float payload). Loading restores the parameters
// bit-exactly; any structural mismatch raises IoError.
struct Checkpoint {
    ModelParams params;
    std::uint64_t seed = 0;
};

void save_checkpoint(const ModelParams& params, std::uint64_t seed,
                     const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

// Cached tree bases for one working graph, keyed by the graph's structural
// hash plus the (k, seed) that produced the roots. The file stores each
// tree's root, parent-edge and depth arrays, and each cycle's edge list; the
// incidence matrices are rebuilt from the edge lists on load, which
// reproduces them exactly.
struct BasisCache {
    std::uint64_t dataset_hash = 0;
    std::uint64_t k = 0;
    std::uint64_t seed = 0;
    std::size_t num_edges = 0;  // chain universe of every stored cycle
    std::vector<BasisBundle> bases;
};

void save_basis_cache(const BasisCache& cache,
                      const std::filesystem::path& file);
BasisCache load_basis_cache(const std::filesystem::path& file);

}  // namespace cyclekit
