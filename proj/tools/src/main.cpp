// Command-line front end: prepare (bases + stats), train (checkpoint + log),
// eval (metrics JSON), stats shortness (histogram CSVs), and sweep-k
// (AUC-PR vs basis count). Every command is deterministic for a fixed seed;
// only timing fields vary between identical runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cyclekit/cycle_graph.hpp"
#include "cyclekit/error.hpp"
#include "cyclekit/kg.hpp"
#include "cyclekit/metrics.hpp"
#include "cyclekit/model.hpp"
#include "cyclekit/pipeline.hpp"
#include "cyclekit/rng.hpp"
#include "cyclekit/serialize.hpp"
#include "cyclekit/spt.hpp"
#include "cyclekit/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cyclekit;

namespace {

struct RunConfig {
    std::string data_root = "data";
    std::string dataset;
    std::string out_dir = "out";
    std::string split = "test";
    std::size_t k = 20;
    std::size_t m = 2;
    std::size_t epochs = 100;
    std::size_t patience = 20;
    double lr = 0.005;
    double weight_decay = 5e-5;
    double dropout = 0.2;
    std::size_t d_h = 10;
    std::uint64_t seed = 0;
    std::size_t neg_ratio = 1;
    std::size_t num_neg = 50;
    std::size_t repeats = 1;
    std::string checkpoint;
    std::string ablation;
    std::string metric = "auc-pr";
    std::string modes = "single,random-10,cluster-10";
    std::vector<std::size_t> sweep_values;
    bool export_cycle_graphs = false;
};

// All negative sampling flows through one stream derivation so that
// evaluating a checkpoint on its own training split regenerates exactly the
// negatives it was trained against.
std::uint64_t negative_seed(std::uint64_t seed, std::uint64_t repeat) {
    return derive_seed(derive_seed(seed, 0x4e4547), repeat);
}

ModelConfig model_config(const RunConfig& rc, std::size_t num_relations,
                         std::size_t k) {
    ModelConfig cfg;
    cfg.num_relations = num_relations;
    cfg.hidden_dim = rc.d_h;
    cfg.embed_dim = 2 * rc.d_h;  // matches the cycle feature width
    cfg.gcn_hidden = 2 * rc.d_h;
    cfg.gcn_out = 2 * rc.d_h;
    cfg.mlp_hidden = 2 * rc.d_h;
    cfg.num_bases = k;
    cfg.dropout = rc.dropout;
    return cfg;
}

DatasetSplits load_data(const RunConfig& rc) {
    if (rc.dataset.empty())
        throw ConfigError("no dataset given; pass --data <name>");
    return load_dataset(fs::path(rc.data_root) / rc.dataset);
}

const KnowledgeGraph& pick_split(const DatasetSplits& data,
                                 const std::string& split) {
    if (split == "train") return data.train;
    if (split == "test") return data.test;
    throw ConfigError("unknown split '" + split + "'; use train or test");
}

fs::path ensure_out_dir(const RunConfig& rc) {
    fs::path dir(rc.out_dir);
    fs::create_directories(dir);
    return dir;
}

json phase_json(const PhaseTimer& timer) {
    json out = json::object();
    for (const auto& [name, seconds] : timer.phases()) out[name] = seconds;
    return out;
}

void print_phases(const PhaseTimer& timer) {
    for (const auto& [name, seconds] : timer.phases())
        std::cout << "  " << name << ": " << seconds << " s\n";
}

// ---------------------------------------------------------------- prepare

void cmd_prepare(const RunConfig& rc) {
    PhaseTimer timer;
    timer.start("preparation");
    auto data = load_data(rc);
    const KnowledgeGraph& g = pick_split(data, rc.split);
    auto bases = build_all_bases(g, rc.k, rc.seed);
    timer.stop();

    auto out = ensure_out_dir(rc);
    BasisCache cache{structural_hash(g), rc.k, rc.seed, g.num_edges(), bases};
    save_basis_cache(cache, out / "basis_cache.cb");

    std::ofstream csv(out / "basis_stats.csv", std::ios::trunc);
    csv << "cycle_id,root,length\n";
    std::size_t cycle_id = 0;
    std::vector<std::uint32_t> lengths;
    for (const auto& bundle : bases)
        for (std::size_t j = 0; j < bundle.basis.cycles.size(); ++j) {
            csv << cycle_id++ << ',' << bundle.basis.tree.root << ','
                << bundle.basis.cycle_length[j] << '\n';
            lengths.push_back(bundle.basis.cycle_length[j]);
        }
    if (!csv) throw IoError("failed writing basis_stats.csv");

    auto comps = connected_components(g);
    std::vector<std::size_t> edges_in(comps.members.size(), 0);
    for (const Triplet& trip : g.triplets())
        ++edges_in[static_cast<std::size_t>(comps.label[trip.head])];
    std::cout << "dataset " << rc.dataset << " split " << rc.split << ": "
              << g.num_entities() << " entities, " << g.num_edges()
              << " edges, " << comps.count << " component(s)\n";
    for (std::size_t c = 0; c < comps.members.size(); ++c) {
        const std::size_t beta =
            edges_in[c] + 1 > comps.members[c].size()
                ? edges_in[c] + 1 - comps.members[c].size()
                : 0;
        std::cout << "  component " << c << ": beta " << beta << " ("
                  << comps.members[c].size() << " vertices, " << edges_in[c]
                  << " edges)\n";
    }
    if (rc.export_cycle_graphs) {
        for (std::size_t b = 0; b < bases.size(); ++b) {
            auto cg = build_cycle_graph(cycle_overlap(bases[b].incidence),
                                        rc.m);
            std::ofstream edges(
                out / ("cycle_graph_" + std::to_string(b) + ".csv"),
                std::ios::trunc);
            edges << "src,dst,overlap\n";
            for (std::size_t e = 0; e < cg.edges.size(); ++e)
                edges << cg.edges[e].first << ',' << cg.edges[e].second << ','
                      << cg.overlap[e] << '\n';
            if (!edges)
                throw IoError("failed writing cycle graph CSV for basis " +
                              std::to_string(b));
        }
        std::cout << "wrote " << bases.size() << " cycle-graph CSV(s)\n";
    }

    if (!lengths.empty()) {
        std::sort(lengths.begin(), lengths.end());
        auto q = [&](double p) {
            return lengths[std::min(lengths.size() - 1,
                                    static_cast<std::size_t>(
                                        p * static_cast<double>(
                                                lengths.size())))];
        };
        std::cout << "  cycle lengths: p50 " << q(0.50) << ", p90 " << q(0.90)
                  << ", max " << lengths.back() << " over " << lengths.size()
                  << " cycles\n";
    }
    print_phases(timer);
    std::cout << "wrote " << (out / "basis_cache.cb").string() << " and "
              << (out / "basis_stats.csv").string() << "\n";
}

// ------------------------------------------------------------------ train

struct TrainedRun {
    TrainResult result;
    PreparedInstance instance;
};

TrainedRun run_training(const RunConfig& rc, const KnowledgeGraph& train,
                        std::size_t k, PhaseTimer& timer,
                        const std::function<void(const EpochRecord&)>& on_epoch) {
    timer.start("preparation");
    auto targets = sample_negatives(train, train.triplets(), rc.neg_ratio,
                                    negative_seed(rc.seed, 0));
    auto inst = prepare_instance(train, targets, k, rc.m, rc.seed);
    timer.stop();

    TrainConfig tcfg;
    tcfg.epochs = rc.epochs;
    tcfg.patience = rc.patience;
    tcfg.lr = rc.lr;
    tcfg.weight_decay = rc.weight_decay;
    tcfg.dropout = rc.dropout;
    tcfg.seed = rc.seed;

    timer.start("training");
    auto result = train_model(inst, model_config(rc, train.num_relations(), k),
                              tcfg, on_epoch);
    timer.stop();
    return {std::move(result), std::move(inst)};
}

void cmd_train(const RunConfig& rc) {
    std::size_t k = rc.k;
    if (rc.ablation == "single-basis") k = 1;

    auto data = load_data(rc);
    auto out = ensure_out_dir(rc);
    std::ofstream log(out / "train_log.jsonl", std::ios::trunc);
    if (!log) throw IoError("failed opening train_log.jsonl");

    PhaseTimer timer;
    auto run = run_training(rc, data.train, k, timer,
                            [&](const EpochRecord& r) {
                                json line{{"epoch", r.epoch},
                                          {"loss", r.loss},
                                          {"train_auc_pr", r.train_auc_pr}};
                                log << line.dump() << '\n';
                            });
    log.flush();
    if (!log) throw IoError("failed writing train_log.jsonl");

    save_checkpoint(run.result.params, rc.seed, out / "checkpoint.ck");
    std::cout << "trained " << run.result.history.size() << " epoch(s); best "
              << run.result.best_auc_pr << " at epoch "
              << run.result.best_epoch
              << (run.result.stopped_early ? " (early stop)" : "") << "\n";
    print_phases(timer);
    std::cout << "wrote " << (out / "checkpoint.ck").string() << " and "
              << (out / "train_log.jsonl").string() << "\n";
}

// ------------------------------------------------------------------- eval

double eval_auc_pr(const ModelParams& params, const KnowledgeGraph& g,
                   const RunConfig& rc, std::size_t k, std::uint64_t nseed,
                   PhaseTimer& timer) {
    timer.start("preparation");
    auto targets = sample_negatives(g, g.triplets(), rc.neg_ratio, nseed);
    auto inst = prepare_instance(g, targets, k, rc.m, rc.seed);
    timer.stop();
    timer.start("inference");
    DropoutPlan off;
    auto batch = model_forward(params, inst, off, nullptr);
    double ap = average_precision(batch.y_final, inst.labels);
    timer.stop();
    return ap;
}

double eval_hits(const ModelParams& params, const KnowledgeGraph& g,
                 const RunConfig& rc, std::size_t k, std::uint64_t nseed,
                 PhaseTimer& timer) {
    timer.start("preparation");
    auto targets = sample_negatives(g, g.triplets(), rc.num_neg, nseed);
    auto inst = prepare_instance(g, targets, k, rc.m, rc.seed);
    timer.stop();
    timer.start("inference");
    DropoutPlan off;
    auto batch = model_forward(params, inst, off, nullptr);
    double hits = grouped_hits_at_k(batch.y_final, targets, 10);
    timer.stop();
    return hits;
}

void cmd_eval(const RunConfig& rc) {
    auto data = load_data(rc);
    const KnowledgeGraph& g = pick_split(data, rc.split);

    fs::path ck_path = rc.checkpoint.empty()
                           ? fs::path(rc.out_dir) / "checkpoint.ck"
                           : fs::path(rc.checkpoint);
    auto ck = load_checkpoint(ck_path);
    if (ck.params.cfg.num_relations != g.num_relations())
        throw ConfigError(
            "relation vocabulary mismatch: checkpoint expects " +
            std::to_string(ck.params.cfg.num_relations) + " relations, " +
            rc.dataset + "/" + rc.split + " has " +
            std::to_string(g.num_relations()));
    const std::size_t k = ck.params.cfg.num_bases;

    PhaseTimer timer;
    double ap = 0.0;
    double hits = 0.0;
    for (std::size_t r = 0; r < rc.repeats; ++r) {
        ap += eval_auc_pr(ck.params, g, rc, k, negative_seed(rc.seed, r),
                          timer);
        hits += eval_hits(ck.params, g, rc, k,
                          negative_seed(rc.seed, 1000 + r), timer);
    }
    ap /= static_cast<double>(rc.repeats);
    hits /= static_cast<double>(rc.repeats);

    timer.start("training");  // present in the report, zero for eval
    timer.stop();

    json metrics{{"dataset", rc.dataset}, {"split", rc.split},
                 {"k", k},                {"seed", rc.seed},
                 {"auc_pr", ap},          {"hits_at_10", hits},
                 {"phase_times", phase_json(timer)}};
    auto out = ensure_out_dir(rc);
    std::ofstream file(out / "metrics.json", std::ios::trunc);
    file << metrics.dump(2) << '\n';
    if (!file) throw IoError("failed writing metrics.json");

    if (rc.metric == "hits@10")
        std::cout << "hits@10 " << hits << " (auc_pr " << ap << ") over "
                  << rc.repeats << " repeat(s)\n";
    else
        std::cout << "auc_pr " << ap << " (hits@10 " << hits << ") over "
                  << rc.repeats << " repeat(s)\n";
    print_phases(timer);
    std::cout << "wrote " << (out / "metrics.json").string() << "\n";
}

// ----------------------------------------------------------------- stats

std::vector<BasisBundle> random_root_bases(const KnowledgeGraph& g,
                                           std::size_t k,
                                           std::uint64_t seed) {
    std::vector<EntityId> ids(g.num_entities());
    for (std::size_t i = 0; i < ids.size(); ++i)
        ids[i] = static_cast<EntityId>(i);
    Rng rng(derive_seed(seed, 0x524e4452));
    const std::size_t take = std::min(k, ids.size());
    for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + rng.below(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
    std::vector<BasisBundle> bases;
    for (std::size_t i = 0; i < take; ++i) {
        auto tree = build_spt(g, ids[i]);
        auto basis = spt_cycle_basis(g, tree);
        auto incidence = cycle_incidence_matrix(basis, g.num_edges());
        bases.push_back({std::move(basis), std::move(incidence)});
    }
    return bases;
}

void cmd_stats_shortness(const RunConfig& rc) {
    auto data = load_data(rc);
    const KnowledgeGraph& g = pick_split(data, rc.split);
    std::vector<EdgeId> targets(g.num_edges());
    for (std::size_t e = 0; e < targets.size(); ++e)
        targets[e] = static_cast<EdgeId>(e);

    auto out = ensure_out_dir(rc);
    std::vector<std::string> modes;
    for (std::size_t start = 0; start < rc.modes.size();) {
        auto comma = rc.modes.find(',', start);
        if (comma == std::string::npos) comma = rc.modes.size();
        if (comma > start) modes.push_back(rc.modes.substr(start, comma - start));
        start = comma + 1;
    }
    if (modes.empty()) throw ConfigError("no histogram modes given");

    for (const std::string& mode : modes) {
        std::vector<BasisBundle> bases;
        if (mode == "single") {
            bases = build_all_bases(g, 1, rc.seed);
        } else if (mode.rfind("cluster-", 0) == 0) {
            bases = build_all_bases(g, std::stoul(mode.substr(8)), rc.seed);
        } else if (mode.rfind("random-", 0) == 0) {
            bases = random_root_bases(g, std::stoul(mode.substr(7)), rc.seed);
        } else {
            throw ConfigError("unknown shortness mode '" + mode +
                              "'; use single, cluster-N, or random-N");
        }

        auto hist = shortness_histogram(bases, targets);
        std::ofstream csv(out / ("shortness_" + mode + ".csv"),
                          std::ios::trunc);
        csv << "min_length,proportion\n";
        for (const auto& [length, share] : hist.bins)
            csv << length << ',' << share << '\n';
        csv << "inf," << hist.uncovered << '\n';
        if (!csv) throw IoError("failed writing shortness CSV for " + mode);

        std::cout << mode << ": mean covered length " << hist.finite_mean
                  << ", uncovered share " << hist.uncovered << "\n";
    }
    std::cout << "wrote " << modes.size() << " CSV file(s) under "
              << out.string() << "\n";
}

// ---------------------------------------------------------------- sweep-k

void cmd_sweep_k(const RunConfig& rc) {
    if (rc.sweep_values.empty())
        throw ConfigError("sweep-k needs at least one k value");
    auto data = load_data(rc);
    auto out = ensure_out_dir(rc);

    std::ofstream csv(out / "sweep_k.csv", std::ios::trunc);
    csv << "k,auc_pr\n";
    for (std::size_t k : rc.sweep_values) {
        if (k == 0) throw ConfigError("k values must be positive");
        PhaseTimer timer;
        auto run = run_training(rc, data.train, k, timer, {});
        double ap = eval_auc_pr(run.result.params, data.test, rc, k,
                                negative_seed(rc.seed, 0), timer);
        csv << k << ',' << ap << '\n';
        std::cout << "k " << k << ": test auc_pr " << ap << " (best train "
                  << run.result.best_auc_pr << ")\n";
    }
    if (!csv) throw IoError("failed writing sweep_k.csv");
    std::cout << "wrote " << (out / "sweep_k.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cycle-basis link prediction toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "key=value file; command-line flags take precedence");

    RunConfig rc;
    app.add_option("--data", rc.dataset, "Dataset name under the data root");
    app.add_option("--data-root", rc.data_root,
                   "Directory holding <dataset>/{train.txt,test.txt}")
        ->capture_default_str();
    app.add_option("--out", rc.out_dir, "Output directory")
        ->capture_default_str();
    app.add_option("--split", rc.split, "Graph split to operate on")
        ->check(CLI::IsMember({"train", "test"}))
        ->capture_default_str();
    app.add_option("--k", rc.k, "Number of tree bases")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--m", rc.m, "Top overlap neighbors per cycle")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--epochs", rc.epochs, "Training epochs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--patience", rc.patience, "Early-stopping patience")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--lr", rc.lr, "Learning rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--weight-decay", rc.weight_decay, "L2 penalty")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--dropout", rc.dropout, "Dropout rate")
        ->check(CLI::Range(0.0, 0.95))
        ->capture_default_str();
    app.add_option("--d-h", rc.d_h, "Recurrent hidden width per direction")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--seed", rc.seed, "Run seed")->capture_default_str();
    app.add_option("--neg-ratio", rc.neg_ratio,
                   "Negatives per positive for training and AUC-PR")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* prepare = app.add_subcommand(
        "prepare", "Build tree bases, write the cache and basis stats");
    prepare->fallthrough();
    prepare->add_flag("--export-cycle-graphs", rc.export_cycle_graphs,
                      "Also write src,dst,overlap CSVs, one per basis");

    auto* train = app.add_subcommand(
        "train", "Train on the training split, write checkpoint and log");
    train->fallthrough();
    train->add_option("--ablation", rc.ablation, "Ablation variant")
        ->check(CLI::IsMember({"single-basis"}));

    auto* eval = app.add_subcommand(
        "eval", "Score a split with a checkpoint, write metrics JSON");
    eval->fallthrough();
    eval->add_option("--checkpoint", rc.checkpoint,
                     "Checkpoint path (default <out>/checkpoint.ck)");
    eval->add_option("--repeats", rc.repeats,
                     "Average metrics over this many negative samplings")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    eval->add_option("--metric", rc.metric,
                     "Metric emphasized on stdout (both land in the JSON)")
        ->check(CLI::IsMember({"auc-pr", "hits@10"}))
        ->capture_default_str();
    eval->add_option("--num-neg", rc.num_neg,
                     "Negatives per positive for hits@10")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    stats->require_subcommand(1);
    stats->fallthrough();
    auto* shortness = stats->add_subcommand(
        "shortness", "Histogram of minimum covering-cycle lengths per mode");
    shortness->fallthrough();
    shortness->add_option("--modes", rc.modes,
                          "Comma list of single, cluster-N, random-N")
        ->capture_default_str();

    auto* sweep = app.add_subcommand(
        "sweep-k", "Train and evaluate across basis counts, write CSV");
    sweep->fallthrough();
    sweep->add_option("--values", rc.sweep_values, "k values to sweep")
        ->required()
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (*prepare) cmd_prepare(rc);
        if (*train) cmd_train(rc);
        if (*eval) cmd_eval(rc);
        if (*shortness) cmd_stats_shortness(rc);
        if (*sweep) cmd_sweep_k(rc);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
