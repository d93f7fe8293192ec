// Acceptance gate: runs every top-level acceptance criterion and prints one
// verdict line per criterion. Criteria that need benchmark datasets look for
// ./data/<name>/{train.txt,test.txt} (override the root with the
// CYCLEKIT_DATA_ROOT environment variable) and report SKIP when the files
// are absent rather than silently passing. The process exits nonzero only
// when some criterion actually FAILs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclekit/error.hpp"
#include "cyclekit/kg.hpp"
#include "cyclekit/metrics.hpp"
#include "cyclekit/model.hpp"
#include "cyclekit/pipeline.hpp"
#include "cyclekit/rng.hpp"
#include "cyclekit/spt.hpp"
#include "cyclekit/synthetic.hpp"
#include "cyclekit/trainer.hpp"
#include "cyclekit/z2.hpp"
#include "../support/test_graphs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cyclekit;

namespace {

// ------------------------------------------------------------------ shared

struct Verdict {
    std::string status;  // "PASS", "FAIL", or "SKIP"
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

fs::path data_root() {
    if (const char* env = std::getenv("CYCLEKIT_DATA_ROOT")) return env;
    return "data";
}

std::optional<fs::path> find_dataset(const std::vector<std::string>& names) {
    for (const auto& name : names) {
        fs::path dir = data_root() / name;
        if (fs::exists(dir / "train.txt") && fs::exists(dir / "test.txt"))
            return dir;
    }
    return std::nullopt;
}

const std::vector<std::string> kWnNames = {"WN18RR_v1", "wn18rr_v1",
                                           "WN18RR-v1", "wn18rr-v1"};
const std::vector<std::string> kNellNames = {"NELL995_v1", "nell995_v1",
                                             "NELL-995_v1", "nell-995_v1"};

fs::path scratch_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "cyclekit_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Independent zero-boundary oracle: a chain is a cycle iff every vertex
// touches an even number of its edges (a self-loop touches twice).
bool zero_boundary(const KnowledgeGraph& g, const Z2Chain& chain) {
    std::vector<std::uint8_t> parity(g.num_entities(), 0);
    for (std::uint32_t e : chain.indices()) {
        const Triplet& t = g.triplets()[e];
        parity[t.head] ^= 1;
        parity[t.tail] ^= 1;
    }
    return std::all_of(parity.begin(), parity.end(),
                       [](std::uint8_t p) { return p == 0; });
}

// Independent rank computation by elimination on copies of the raw words.
std::size_t independent_rank(const std::vector<Z2Chain>& chains) {
    std::vector<std::vector<std::uint64_t>> rows;
    for (const auto& c : chains)
        rows.emplace_back(c.words().begin(), c.words().end());
    std::size_t rank = 0;
    const std::size_t width = rows.empty() ? 0 : rows[0].size();
    for (std::size_t bit = 0; bit < width * 64 && rank < rows.size(); ++bit) {
        const std::size_t w = bit / 64;
        const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
        std::size_t pivot = rank;
        while (pivot < rows.size() && !(rows[pivot][w] & mask)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == rank || !(rows[i][w] & mask)) continue;
            for (std::size_t k = 0; k < width; ++k) rows[i][k] ^= rows[rank][k];
        }
        ++rank;
    }
    return rank;
}

// Independent component count via union-find over the triplet list.
std::size_t independent_components(const KnowledgeGraph& g) {
    std::vector<std::size_t> parent(g.num_entities());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Triplet& t : g.triplets()) parent[find(t.head)] = find(t.tail);
    std::size_t count = 0;
    for (std::size_t v = 0; v < parent.size(); ++v)
        if (find(v) == v) ++count;
    return count;
}

// Checks every basis built over one graph; returns an error string or "".
std::string check_bases(const KnowledgeGraph& g, std::size_t k,
                        std::uint64_t seed, std::size_t& bases_seen) {
    const std::size_t beta =
        g.num_edges() + independent_components(g) - g.num_entities();
    auto bases = build_all_bases(g, k, seed);
    for (const auto& bundle : bases) {
        ++bases_seen;
        if (bundle.basis.cycles.size() != beta)
            return "basis has " + std::to_string(bundle.basis.cycles.size()) +
                   " cycles, expected beta = " + std::to_string(beta);
        std::vector<std::uint8_t> in_tree(g.num_edges(), 0);
        for (EdgeId e : bundle.basis.tree.parent_edge)
            if (e != kNoEdge) in_tree[e] = 1;
        for (std::size_t j = 0; j < bundle.basis.cycles.size(); ++j) {
            const Z2Chain& cyc = bundle.basis.cycles[j];
            if (!zero_boundary(g, cyc)) return "cycle with nonzero boundary";
            std::size_t non_tree = 0;
            for (std::uint32_t e : cyc.indices())
                if (!in_tree[e]) ++non_tree;
            if (non_tree != 1 || !cyc.test(bundle.basis.nontree_edge[j]))
                return "cycle does not contain exactly its own non-tree edge";
        }
        if (independent_rank(bundle.basis.cycles) != beta)
            return "basis cycles are linearly dependent";
    }
    return "";
}

std::vector<fs::path> all_benchmark_dirs() {
    std::vector<fs::path> dirs;
    if (!fs::exists(data_root())) return dirs;
    for (const auto& entry : fs::directory_iterator(data_root())) {
        if (!entry.is_directory()) continue;
        if (fs::exists(entry.path() / "train.txt") &&
            fs::exists(entry.path() / "test.txt"))
            dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

// One full training run with the library's default hyperparameters.
struct FullRun {
    TrainResult result;
    PreparedInstance instance;
};

FullRun default_train(const KnowledgeGraph& train, std::size_t k,
                      std::uint64_t seed) {
    auto targets = sample_negatives(train, train.triplets(), 1,
                                    derive_seed(seed, 0x4e4547));
    auto inst = prepare_instance(train, targets, k, 2, seed);
    ModelConfig mcfg;
    mcfg.num_relations = train.num_relations();
    mcfg.hidden_dim = 10;
    mcfg.embed_dim = 20;
    mcfg.gcn_hidden = 20;
    mcfg.gcn_out = 20;
    mcfg.mlp_hidden = 20;
    mcfg.num_bases = k;
    TrainConfig tcfg;
    tcfg.seed = seed;
    auto result = train_model(inst, mcfg, tcfg, {});
    return {std::move(result), std::move(inst)};
}

double test_auc_pr(const ModelParams& params, const KnowledgeGraph& g,
                   std::size_t k, std::uint64_t seed) {
    auto targets =
        sample_negatives(g, g.triplets(), 1, derive_seed(seed, 0x777575));
    auto inst = prepare_instance(g, targets, k, 2, seed);
    DropoutPlan off;
    auto batch = model_forward(params, inst, off, nullptr);
    return average_precision(batch.y_final, inst.labels);
}

double test_hits(const ModelParams& params, const KnowledgeGraph& g,
                 std::size_t k, std::uint64_t seed) {
    auto targets =
        sample_negatives(g, g.triplets(), 50, derive_seed(seed, 0x686974));
    auto inst = prepare_instance(g, targets, k, 2, seed);
    DropoutPlan off;
    auto batch = model_forward(params, inst, off, nullptr);
    return grouped_hits_at_k(batch.y_final, targets, 10);
}

// ---------------------------------------------------------------- criteria

Verdict criterion_basis_correctness() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(20260817);
    std::size_t bases_seen = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng.below(49);           // |V| <= 50
        const std::size_t cap = 150 - (n - 1);             // |E| <= 150
        const std::size_t extra = rng.below(std::min<std::uint64_t>(cap, 101));
        auto g = testsupport::random_connected_multigraph(rng, n, extra, 3);
        auto err = check_bases(g, 1 + rng.below(3), 1000 + i, bases_seen);
        if (!err.empty())
            return {"FAIL", "random graph " + std::to_string(i) + ": " + err};
    }
    std::size_t split_count = 0;
    for (const auto& dir : all_benchmark_dirs()) {
        auto data = load_dataset(dir);
        for (const KnowledgeGraph* g : {&data.train, &data.test}) {
            auto err = check_bases(*g, 3, 7, bases_seen);
            if (!err.empty())
                return {"FAIL", dir.filename().string() + ": " + err};
            ++split_count;
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 30.0)
        return {"FAIL", "suite took " + std::to_string(dt) + " s (budget 30)"};
    std::ostringstream msg;
    msg << "200 random multigraphs + " << split_count << " benchmark split(s), "
        << bases_seen << " bases verified in " << dt << " s";
    return {"PASS", msg.str()};
}

Verdict criterion_spanning_oracle() {
    Rng rng(99173);
    std::size_t solved = 0;
    for (int gi = 0; gi < 20; ++gi) {
        const std::size_t n = 4 + rng.below(20);
        auto g = testsupport::random_connected_multigraph(
            rng, n, 3 + rng.below(20), 3);
        auto bases = build_all_bases(g, 1, 500 + gi);
        const auto& basis = bases[0].basis;
        for (int c = 0; c < 50; ++c) {
            auto walk = testsupport::random_walk_cycle(g, rng);
            auto coeff = solve_in_span(basis.cycles, walk);
            if (!coeff.has_value())
                return {"FAIL", "walk cycle outside basis span on graph " +
                                    std::to_string(gi)};
            Z2Chain recon(g.num_edges());
            for (std::uint32_t j : coeff->indices()) recon ^= basis.cycles[j];
            if (!(recon == walk))
                return {"FAIL", "recombination mismatch on graph " +
                                    std::to_string(gi)};
            ++solved;
        }
    }
    return {"PASS", std::to_string(solved) +
                        " random-walk cycles expressed in single bases "
                        "across 20 graphs"};
}

Verdict criterion_exhaustive_count() {
    Rng rng(55021);
    std::size_t graphs = 0;
    while (graphs < 40) {
        auto g = testsupport::random_multigraph(rng, 4, 3, 2);
        if (g.num_edges() > 12 || g.num_edges() == 0) continue;
        // Independent count: enumerate every subset, test parity per vertex.
        std::size_t kernel = 0;
        const std::size_t m = g.num_edges();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
            std::vector<std::uint8_t> parity(g.num_entities(), 0);
            for (std::size_t e = 0; e < m; ++e)
                if ((mask >> e) & 1) {
                    parity[g.triplets()[e].head] ^= 1;
                    parity[g.triplets()[e].tail] ^= 1;
                }
            if (std::all_of(parity.begin(), parity.end(),
                            [](std::uint8_t p) { return p == 0; }))
                ++kernel;
        }
        const std::size_t beta =
            g.num_edges() + independent_components(g) - g.num_entities();
        if (kernel != (std::size_t{1} << beta))
            return {"FAIL", "kernel size " + std::to_string(kernel) +
                                " != 2^beta with beta=" + std::to_string(beta)};
        if (betti_number(g) != beta)
            return {"FAIL", "library betti number disagrees with oracle"};
        ++graphs;
    }
    // A handcrafted graph with two parallel pairs (self-loops are rejected
    // at graph construction, so the edge universe never contains them).
    auto g = testsupport::make_graph(
        3, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 2}, {1, 1, 2}});
    const std::size_t beta = g.num_edges() + 1 - g.num_entities();
    if (testsupport::exhaustive_cycle_count(g) != (std::size_t{1} << beta) ||
        betti_number(g) != beta)
        return {"FAIL", "parallel-pair graph miscounted"};
    return {"PASS", "40 random graphs with |E| <= 12: kernel size == 2^beta"};
}

Verdict criterion_gradient_check() {
    auto t0 = std::chrono::steady_clock::now();
    const double h = 1e-5;
    const double margin_floor = 10.0 * h;
    int passed = 0;
    double worst = 0.0;
    Rng seeds(424242);
    for (int attempt = 0; attempt < 60 && passed < 5; ++attempt) {
        Rng rng(9000 + attempt);
        auto g = testsupport::random_connected_multigraph(rng, 6, 4, 2);
        std::vector<Triplet> positives{g.triplets()[0],
                                       g.triplets()[g.num_edges() / 2]};
        TargetSet targets;
        try {
            targets = sample_negatives(g, positives, 1, 31 + attempt);
        } catch (const SamplingError&) {
            continue;
        }
        auto inst = prepare_instance(g, targets, 2, 2, 17 + attempt);
        ModelConfig mcfg;
        mcfg.num_relations = g.num_relations();
        mcfg.embed_dim = 6;
        mcfg.hidden_dim = 4;
        mcfg.gcn_hidden = 7;
        mcfg.gcn_out = 5;
        mcfg.mlp_hidden = 6;
        mcfg.num_bases = 2;
        auto params = ModelParams::init(mcfg, seeds.next());
        auto report = gradient_check(params, inst, 1e-4, 20);
        if (report.routing_margin <= margin_floor ||
            report.kink_margin <= margin_floor)
            continue;  // finite differences would cross a kink; not a failure
        if (!report.passed)
            return {"FAIL", "relative error " +
                                std::to_string(report.max_rel_error) +
                                " on instance " + std::to_string(attempt)};
        worst = std::max(worst, report.max_rel_error);
        ++passed;
    }
    const double dt = seconds_since(t0);
    if (passed < 5)
        return {"FAIL", "only " + std::to_string(passed) +
                            " margin-safe instances out of 60 attempts"};
    if (dt >= 5.0)
        return {"FAIL", "took " + std::to_string(dt) + " s (budget 5)"};
    std::ostringstream msg;
    msg << passed << " instances, worst relative error " << worst << " in "
        << dt << " s";
    return {"PASS", msg.str()};
}

Verdict criterion_benchmark_reproduction() {
    auto wn = find_dataset(kWnNames);
    if (!wn)
        return {"SKIP", "benchmark files not found under " +
                            (data_root() / kWnNames[0]).string() +
                            "; place train.txt/test.txt there to enable"};
    auto t0 = std::chrono::steady_clock::now();
    auto data = load_dataset(*wn);
    auto run = default_train(data.train, 20, 0);
    const double train_ap = run.result.best_auc_pr;
    const double test_ap = test_auc_pr(run.result.params, data.test, 20, 0);
    const double hits = test_hits(run.result.params, data.test, 20, 0);
    const double dt = seconds_since(t0);
    std::ostringstream msg;
    msg << wn->filename().string() << ": train AUC-PR " << train_ap
        << " (>=0.95), test AUC-PR " << test_ap << " (>=0.90), hits@10 "
        << hits << " (>=0.80) in " << dt << " s";
    if (train_ap < 0.95 || test_ap < 0.90 || hits < 0.80 || dt >= 7200.0)
        return {"FAIL", msg.str()};
    auto nell = find_dataset(kNellNames);
    if (nell) {
        auto nd = load_dataset(*nell);
        auto nrun = default_train(nd.train, 20, 0);
        const double nap = test_auc_pr(nrun.result.params, nd.test, 20, 0);
        msg << "; " << nell->filename().string() << ": test AUC-PR " << nap
            << " (>=0.75)";
        if (nap < 0.75) return {"FAIL", msg.str()};
    } else {
        msg << "; second benchmark absent (skipped)";
    }
    return {"PASS", msg.str()};
}

Verdict criterion_basis_count_ablation() {
    auto wn = find_dataset(kWnNames);
    if (!wn)
        return {"SKIP", "needs " + (data_root() / kWnNames[0]).string() +
                            "; k=10 vs k=1 gap not measurable without it"};
    auto data = load_dataset(*wn);
    auto run10 = default_train(data.train, 10, 0);
    auto run1 = default_train(data.train, 1, 0);
    const double ap10 = test_auc_pr(run10.result.params, data.test, 10, 0);
    const double ap1 = test_auc_pr(run1.result.params, data.test, 1, 0);
    std::ostringstream msg;
    msg << "test AUC-PR k=10: " << ap10 << ", k=1: " << ap1 << ", gap "
        << (ap10 - ap1);
    if (ap10 - ap1 >= 0.10) return {"PASS", msg.str()};
    return {"FAIL", msg.str()};
}

Verdict criterion_shortness() {
    // The mechanism is checked unconditionally on a synthetic graph so the
    // statistic itself is exercised; the criterion verdict needs the
    // benchmark files.
    SyntheticConfig scfg;
    scfg.seed = 12;
    auto syn = make_synthetic(scfg);
    std::vector<EdgeId> syn_targets(syn.train.num_edges());
    std::iota(syn_targets.begin(), syn_targets.end(), EdgeId{0});
    auto syn_single =
        shortness_histogram(build_all_bases(syn.train, 1, 3), syn_targets);
    auto syn_cluster =
        shortness_histogram(build_all_bases(syn.train, 10, 3), syn_targets);
    std::ostringstream mech;
    mech << "synthetic mechanism: cluster-10 mean " << syn_cluster.finite_mean
         << (syn_cluster.finite_mean < syn_single.finite_mean ? " < " : " !< ")
         << "single mean " << syn_single.finite_mean;

    auto wn = find_dataset(kWnNames);
    if (!wn)
        return {"SKIP", "needs " + (data_root() / kWnNames[0]).string() +
                            "; " + mech.str()};
    auto data = load_dataset(*wn);
    std::vector<EdgeId> targets(data.test.num_edges());
    std::iota(targets.begin(), targets.end(), EdgeId{0});
    auto single =
        shortness_histogram(build_all_bases(data.test, 1, 3), targets);
    auto cluster =
        shortness_histogram(build_all_bases(data.test, 10, 3), targets);
    std::ostringstream msg;
    msg << "cluster-10 mean " << cluster.finite_mean << " vs single mean "
        << single.finite_mean << "; " << mech.str();
    if (cluster.finite_mean < single.finite_mean) return {"PASS", msg.str()};
    return {"FAIL", msg.str()};
}

int run_cli(const std::string& args, const fs::path& log) {
    std::string cmd =
        std::string(CYCLEKIT_CLI_PATH) + " " + args + " > " + log.string() +
        " 2>&1";
    int status = std::system(cmd.c_str());
#if defined(WIFEXITED)
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
    return status;
#endif
}

// Writes the synthetic dataset used by the end-to-end determinism and
// entity-agnosticism criteria; returns its data root.
fs::path synthetic_data_root() {
    static fs::path root = [] {
        SyntheticConfig cfg;
        cfg.seed = 8;
        auto data = make_synthetic(cfg);
        auto dir = scratch_dir() / "data" / "syn";
        fs::create_directories(dir);
        save_split(data.train, dir / "train.txt");
        save_split(data.test, dir / "test.txt");
        return scratch_dir() / "data";
    }();
    return root;
}

Verdict criterion_determinism() {
    auto wn = find_dataset(kWnNames);
    const std::string data_args =
        wn ? "--data " + wn->filename().string() + " --data-root " +
                 data_root().string()
           : "--data syn --data-root " + synthetic_data_root().string() +
                 " --epochs 12 --k 5 --d-h 6";
    std::vector<std::string> metric_dumps;
    std::vector<std::string> logs;
    for (const std::string tag : {"run_a", "run_b"}) {
        fs::path out = scratch_dir() / tag;
        if (run_cli("train " + data_args + " --seed 4 --out " + out.string(),
                    scratch_dir() / (tag + "_train.log")) != 0)
            return {"FAIL", "training subprocess failed for " + tag};
        if (run_cli("eval " + data_args + " --seed 4 --num-neg 20 --out " +
                        out.string(),
                    scratch_dir() / (tag + "_eval.log")) != 0)
            return {"FAIL", "eval subprocess failed for " + tag};
        std::ifstream mf(out / "metrics.json");
        json metrics = json::parse(mf);
        metrics.erase("phase_times");  // the only timing-dependent field
        metric_dumps.push_back(metrics.dump());
        std::ifstream lf(out / "train_log.jsonl", std::ios::binary);
        logs.emplace_back(std::istreambuf_iterator<char>(lf),
                          std::istreambuf_iterator<char>());
    }
    if (metric_dumps[0] != metric_dumps[1])
        return {"FAIL", "metrics JSON differs between identical runs"};
    if (logs[0] != logs[1])
        return {"FAIL", "epoch logs differ between identical runs"};
    return {"PASS",
            std::string("two train+eval runs byte-identical after removing "
                        "timings (") +
                (wn ? wn->filename().string() : "synthetic dataset") + ")"};
}

Verdict criterion_entity_agnosticism() {
    // Build a renamed copy of the synthetic test split: entity identifiers
    // are permuted among themselves while every line keeps its position, so
    // the relational structure is untouched.
    SyntheticConfig cfg;
    cfg.seed = 8;
    auto data = make_synthetic(cfg);
    auto dir_a = scratch_dir() / "perm" / "orig";
    auto dir_b = scratch_dir() / "perm" / "renamed";
    fs::create_directories(dir_a);
    fs::create_directories(dir_b);
    save_split(data.train, dir_a / "train.txt");
    save_split(data.test, dir_a / "test.txt");
    save_split(data.train, dir_b / "train.txt");
    {
        std::vector<std::string> names = data.test.entity_names();
        std::vector<std::size_t> perm(names.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(777);
        for (std::size_t i = names.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.below(i)]);
        std::ofstream out(dir_b / "test.txt");
        for (const Triplet& t : data.test.triplets())
            out << names[perm[t.head]] << '\t'
                << data.test.relation_name(t.relation) << '\t'
                << names[perm[t.tail]] << '\n';
    }

    auto loaded_a = load_dataset(dir_a);
    auto loaded_b = load_dataset(dir_b);

    TrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.seed = 5;
    ModelConfig mcfg;
    mcfg.num_relations = loaded_a.train.num_relations();
    mcfg.num_bases = 5;
    auto train_targets = sample_negatives(loaded_a.train,
                                          loaded_a.train.triplets(), 1, 44);
    auto train_inst = prepare_instance(loaded_a.train, train_targets, 5, 2, 5);
    auto trained = train_model(train_inst, mcfg, tcfg, {});

    auto forward = [&](const KnowledgeGraph& g) {
        auto targets = sample_negatives(g, g.triplets(), 1, 91);
        auto inst = prepare_instance(g, targets, 5, 2, 5);
        DropoutPlan off;
        return model_forward(trained.params, inst, off, nullptr).y_final;
    };
    auto ya = forward(loaded_a.test);
    auto yb = forward(loaded_b.test);
    if (ya.size() != yb.size())
        return {"FAIL", "target counts differ after renaming"};
    for (Eigen::Index i = 0; i < ya.size(); ++i)
        if (std::memcmp(&ya[i], &yb[i], sizeof(double)) != 0)
            return {"FAIL", "Y_final differs at target " + std::to_string(i)};

    std::string extra;
    if (auto wn = find_dataset(kWnNames)) {
        auto bench = load_dataset(*wn);
        auto renamed_dir = scratch_dir() / "perm" / "bench";
        fs::create_directories(renamed_dir);
        fs::copy_file(*wn / "train.txt", renamed_dir / "train.txt",
                      fs::copy_options::overwrite_existing);
        std::vector<std::string> names = bench.test.entity_names();
        std::vector<std::size_t> perm(names.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(778);
        for (std::size_t i = names.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.below(i)]);
        std::ofstream out(renamed_dir / "test.txt");
        for (const Triplet& t : bench.test.triplets())
            out << names[perm[t.head]] << '\t'
                << bench.test.relation_name(t.relation) << '\t'
                << names[perm[t.tail]] << '\n';
        out.close();
        auto renamed = load_dataset(renamed_dir);
        ModelConfig bcfg;
        bcfg.num_relations = bench.train.num_relations();
        bcfg.num_bases = 5;
        auto params = ModelParams::init(bcfg, 3);
        auto bench_forward = [&](const KnowledgeGraph& g) {
            auto targets = sample_negatives(g, g.triplets(), 1, 92);
            auto inst = prepare_instance(g, targets, 5, 2, 5);
            DropoutPlan off;
            return model_forward(params, inst, off, nullptr).y_final;
        };
        auto ba = bench_forward(bench.test);
        auto bb = bench_forward(renamed.test);
        for (Eigen::Index i = 0; i < ba.size(); ++i)
            if (std::memcmp(&ba[i], &bb[i], sizeof(double)) != 0)
                return {"FAIL", "benchmark Y_final differs at target " +
                                    std::to_string(i)};
        extra = " and on " + wn->filename().string();
    }
    return {"PASS", "every Y_final bit-identical after permuting entity "
                    "identifiers on the synthetic test split" +
                        extra};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Verdict()> run;
    };
    const std::vector<Entry> criteria = {
        {1, "cycle-basis correctness", criterion_basis_correctness},
        {2, "spanning oracle", criterion_spanning_oracle},
        {3, "exhaustive cycle count", criterion_exhaustive_count},
        {4, "gradient verification", criterion_gradient_check},
        {5, "benchmark reproduction", criterion_benchmark_reproduction},
        {6, "basis-count ablation", criterion_basis_count_ablation},
        {7, "shortness statistic", criterion_shortness},
        {8, "determinism", criterion_determinism},
        {9, "entity-agnosticism", criterion_entity_agnosticism},
    };
    bool failed = false;
    for (const auto& entry : criteria) {
        Verdict v;
        try {
            v = entry.run();
        } catch (const std::exception& e) {
            v = {"FAIL", std::string("exception: ") + e.what()};
        }
        if (v.status == "FAIL") failed = true;
        std::cout << "criterion " << entry.id << " (" << entry.name
                  << "): " << v.status << " — " << v.detail << std::endl;
    }
    return failed ? 1 : 0;
}
