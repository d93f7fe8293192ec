#include "cyclekit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "cyclekit/encoder.hpp"
#include "cyclekit/error.hpp"

namespace cyclekit {

PreparedInstance prepare_instance(const KnowledgeGraph& split,
                                  const TargetSet& targets, std::size_t k,
                                  std::size_t m, std::uint64_t seed) {
    if (k == 0) throw ConfigError("at least one tree basis is required");
    WorkingGraph wg = add_targets_to_graph(split, targets);

    PreparedInstance inst;
    inst.graph = extend_with_inverses(wg.graph);
    inst.target_edges = std::move(wg.target_edges);
    inst.labels = targets.labels;
    inst.num_bases_requested = k;
    inst.bases = build_all_bases(inst.graph, k, seed);
    inst.sequences = SequenceTable(inst.graph.num_relations());

    for (const BasisBundle& bundle : inst.bases) {
        const SptCycleBasis& basis = bundle.basis;
        std::vector<std::uint32_t> seq_ids(basis.cycles.size());
        for (std::size_t j = 0; j < basis.cycles.size(); ++j) {
            auto [s1, s2] = cycle_sequences(basis.cycles[j],
                                            basis.nontree_edge[j], inst.graph);
            seq_ids[j] = inst.sequences.intern(std::move(s1.tokens));
        }
        OverlapMatrix overlap = cycle_overlap(bundle.incidence);
        inst.graphs.push_back(build_cycle_graph(overlap, m));
        inst.adjacency.push_back(normalized_adjacency(inst.graphs.back()));
        inst.cycle_seq.push_back(std::move(seq_ids));
    }
    return inst;
}

PredictionBatch model_forward(const ModelParams& p,
                              const PreparedInstance& inst,
                              const DropoutPlan& drop, ForwardState* state) {
    const std::size_t nb = inst.bases.size();
    if (nb == 0) throw DimensionError("instance has no bases");
    const Eigen::Index fd = static_cast<Eigen::Index>(p.cfg.feature_dim());

    Eigen::MatrixXd encoded = encode_sequences(p, inst.sequences, drop);

    PredictionBatch batch;
    batch.per_basis.resize(nb);
    std::vector<GcnCache> gcn_caches(state ? nb : 0);
    std::vector<HeadCache> head_caches(state ? nb : 0);
    std::vector<RoutedConfidence> routed(nb);

    for (std::size_t b = 0; b < nb; ++b) {
        const auto& seq_ids = inst.cycle_seq[b];
        Eigen::MatrixXd x0(static_cast<Eigen::Index>(seq_ids.size()), fd);
        for (std::size_t j = 0; j < seq_ids.size(); ++j)
            x0.row(static_cast<Eigen::Index>(j)) = encoded.row(seq_ids[j]);

        Eigen::MatrixXd out =
            gcn_forward(p, inst.adjacency[b], x0, drop,
                        static_cast<std::uint64_t>(b),
                        state ? &gcn_caches[b] : nullptr);
        Eigen::VectorXd conf =
            cycle_confidence(p, out, state ? &head_caches[b] : nullptr);
        routed[b] = route_confidence(conf, inst.bases[b].incidence,
                                     inst.target_edges);
        batch.per_basis[b] = routed[b].y;
    }

    Aggregated agg = aggregate_bases(p, batch.per_basis);
    batch.loss = bce_loss(agg.y_final, inst.labels);
    batch.y_final = agg.y_final;
    batch.weights = agg.weights;

    if (state) {
        state->encoded = std::move(encoded);
        state->gcn = std::move(gcn_caches);
        state->head = std::move(head_caches);
        state->routed = std::move(routed);
        state->agg = std::move(agg);
    }
    return batch;
}

ModelParams model_backward(const ModelParams& p, const PreparedInstance& inst,
                           const DropoutPlan& drop,
                           const ForwardState& state) {
    const std::size_t nb = inst.bases.size();
    ModelParams grads = ModelParams::zeros_like(p);

    Eigen::VectorXd d_final = bce_loss_backward(state.agg.y_final, inst.labels);

    std::vector<Eigen::VectorXd> per_basis(nb);
    for (std::size_t b = 0; b < nb; ++b) per_basis[b] = state.routed[b].y;
    std::vector<Eigen::VectorXd> d_per_basis;
    aggregate_bases_backward(state.agg, per_basis, d_final, grads,
                             d_per_basis);

    Eigen::MatrixXd d_encoded =
        Eigen::MatrixXd::Zero(state.encoded.rows(), state.encoded.cols());
    for (std::size_t b = 0; b < nb; ++b) {
        Eigen::VectorXd d_conf =
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(
                inst.cycle_seq[b].size()));
        route_confidence_backward(state.routed[b], d_per_basis[b], d_conf);

        Eigen::MatrixXd d_out;
        cycle_confidence_backward(p, state.head[b], d_conf, grads, d_out);
        Eigen::MatrixXd d_x0;
        gcn_backward(p, inst.adjacency[b], state.gcn[b], d_out, drop,
                     static_cast<std::uint64_t>(b), grads, d_x0);
        const auto& seq_ids = inst.cycle_seq[b];
        for (std::size_t j = 0; j < seq_ids.size(); ++j)
            d_encoded.row(seq_ids[j]) +=
                d_x0.row(static_cast<Eigen::Index>(j));
    }

    encode_sequences_backward(p, inst.sequences, drop, d_encoded, grads);
    return grads;
}

namespace {

// Smallest gap between the winning confidence and the best other covering
// cycle, over all covered targets. Infinite when nothing competes.
double min_routing_margin(const PreparedInstance& inst,
                          const std::vector<RoutedConfidence>& routed,
                          const std::vector<HeadCache>& head) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < inst.bases.size(); ++b) {
        for (std::size_t t = 0; t < inst.target_edges.size(); ++t) {
            std::int32_t winner = routed[b].source_cycle[t];
            if (winner < 0) continue;
            for (std::uint32_t j : inst.bases[b].incidence.row(
                     inst.target_edges[t])) {
                if (static_cast<std::int32_t>(j) == winner) continue;
                double gap = routed[b].y(static_cast<Eigen::Index>(t)) -
                             head[b].p(static_cast<Eigen::Index>(j));
                margin = std::min(margin, gap);
            }
        }
    }
    return margin;
}

double min_kink_margin(const ForwardState& state) {
    double margin = std::numeric_limits<double>::infinity();
    for (const GcnCache& c : state.gcn)
        if (c.pre1.size() > 0)
            margin = std::min(margin, c.pre1.cwiseAbs().minCoeff());
    for (const HeadCache& c : state.head)
        if (c.pre1.size() > 0)
            margin = std::min(margin, c.pre1.cwiseAbs().minCoeff());
    return margin;
}

}  // namespace

GradCheckReport gradient_check(const ModelParams& p,
                               const PreparedInstance& inst, double tolerance,
                               std::size_t max_probes) {
    DropoutPlan off;
    ForwardState state;
    model_forward(p, inst, off, &state);
    ModelParams grads = model_backward(p, inst, off, state);

    GradCheckReport report;
    report.routing_margin = min_routing_margin(inst, state.routed, state.head);
    report.kink_margin = min_kink_margin(state);

    struct Slot {
        std::string name;
        double* param;
        const double* grad;
        std::size_t size;
    };
    ModelParams probe = p;
    std::vector<Slot> slots;
    visit_tensors(probe, [&](const char* name, double* data, std::size_t n) {
        if (n > 0) slots.push_back({name, data, nullptr, n});
    });
    std::size_t i = 0;
    visit_tensors(grads, [&](const char*, double* data, std::size_t n) {
        if (n > 0) slots[i++].grad = data;
    });

    const double h = 1e-5;
    auto loss_at = [&]() {
        return model_forward(probe, inst, off, nullptr).loss;
    };
    for (std::size_t q = 0; q < max_probes; ++q) {
        Slot& slot = slots[q % slots.size()];
        // Stride walk keeps repeat visits to one tensor on fresh elements.
        std::size_t idx = ((q / slots.size()) * 2654435761u + q) % slot.size;
        double orig = slot.param[idx];
        slot.param[idx] = orig + h;
        double lp = loss_at();
        slot.param[idx] = orig - h;
        double lm = loss_at();
        slot.param[idx] = orig;

        double numeric = (lp - lm) / (2.0 * h);
        double analytic = slot.grad[idx];
        double rel = std::abs(analytic - numeric) /
                     std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        report.max_rel_error = std::max(report.max_rel_error, rel);
        ++report.probes;
        if (rel > tolerance)
            report.failures.push_back(
                {slot.name, idx, analytic, numeric, rel});
    }
    report.passed = report.failures.empty();
    return report;
}

}  // namespace cyclekit
