#include "cyclekit/encoder.hpp"

#include <algorithm>
#include <vector>

#include "cyclekit/error.hpp"

namespace cyclekit {

namespace {

constexpr std::size_t kTokenBudget = 16384;  // per-chunk sum of lengths

struct Row {
    std::uint32_t seq;
    std::uint8_t dir;  // 0 = as stored, 1 = reverse rotation
    std::uint32_t len;
};

std::vector<std::pair<std::uint32_t, std::uint32_t>> plan_chunks(
    const SequenceTable& table) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> chunks;
    std::uint32_t begin = 0;
    std::size_t tokens = 0;
    for (std::uint32_t q = 0; q < table.size(); ++q) {
        std::size_t len = table.tokens(q).size();
        if (q > begin && tokens + len > kTokenBudget) {
            chunks.emplace_back(begin, q);
            begin = q;
            tokens = 0;
        }
        tokens += len;
    }
    if (begin < table.size()) chunks.emplace_back(begin, table.size());
    return chunks;
}

void sigmoid_block(Eigen::Ref<Eigen::MatrixXd> m) {
    m = (1.0 + (-m.array()).exp()).inverse().matrix();
}

// Everything one recomputed forward pass stores for one chunk, per step.
struct LayerTrace {
    Eigen::MatrixXd gates;   // n_t x 4h, post-activation [i f g o]
    Eigen::MatrixXd c_prev;  // n_t x h
    Eigen::MatrixXd c;       // n_t x h
    Eigen::MatrixXd h_prev;  // n_t x h
};

struct StepTrace {
    LayerTrace l1, l2;
    Eigen::MatrixXd l2_input;  // n_t x h, layer-1 output after dropout
};

struct ChunkContext {
    std::vector<Row> rows;                       // sorted by len desc
    std::vector<std::vector<RelationId>> toks;   // per row
    std::vector<std::size_t> active;             // prefix count per step
    std::size_t maxlen = 0;
};

ChunkContext build_context(const SequenceTable& table, std::uint32_t begin,
                           std::uint32_t end) {
    ChunkContext ctx;
    ctx.rows.reserve(2 * (end - begin));
    for (std::uint32_t q = begin; q < end; ++q) {
        std::uint32_t len =
            static_cast<std::uint32_t>(table.tokens(q).size());
        if (len == 0) throw DimensionError("empty sequence in table");
        ctx.rows.push_back({q, 0, len});
        ctx.rows.push_back({q, 1, len});
    }
    std::stable_sort(ctx.rows.begin(), ctx.rows.end(),
                     [](const Row& a, const Row& b) { return a.len > b.len; });
    ctx.maxlen = ctx.rows.front().len;
    ctx.toks.reserve(ctx.rows.size());
    for (const Row& r : ctx.rows) {
        const auto& s1 = table.tokens(r.seq);
        ctx.toks.push_back(r.dir == 0 ? s1
                                      : reverse_rotation(s1, table.num_relations()));
    }
    ctx.active.resize(ctx.maxlen);
    for (std::size_t t = 0; t < ctx.maxlen; ++t) {
        std::size_t n = 0;
        while (n < ctx.rows.size() && ctx.rows[n].len > t) ++n;
        ctx.active[t] = n;
    }
    return ctx;
}

// One layer's step. Fills h and c in place for the active prefix; when
// trace is non-null the intermediate values are copied out for backward.
void layer_step(const RecurrentLayer& layer, const Eigen::MatrixXd& input,
                Eigen::MatrixXd& h, Eigen::MatrixXd& c, std::size_t n,
                LayerTrace* trace) {
    const Eigen::Index ni = static_cast<Eigen::Index>(n);
    const Eigen::Index hd = layer.w_recur.cols();

    Eigen::MatrixXd pre = input * layer.w_input.transpose();
    pre.noalias() += h.topRows(ni) * layer.w_recur.transpose();
    pre.rowwise() += layer.bias.transpose();

    sigmoid_block(pre.leftCols(2 * hd));             // input, forget
    pre.middleCols(2 * hd, hd) =
        pre.middleCols(2 * hd, hd).array().tanh().matrix();  // candidate
    sigmoid_block(pre.rightCols(hd));                // output

    if (trace) {
        trace->gates = pre;
        trace->c_prev = c.topRows(ni);
        trace->h_prev = h.topRows(ni);
    }

    auto gi = pre.leftCols(hd).array();
    auto gf = pre.middleCols(hd, hd).array();
    auto gg = pre.middleCols(2 * hd, hd).array();
    auto go = pre.rightCols(hd).array();

    c.topRows(ni) = (gf * c.topRows(ni).array() + gi * gg).matrix();
    h.topRows(ni) = (go * c.topRows(ni).array().tanh()).matrix();
    if (trace) trace->c = c.topRows(ni);
}

// Dropout multipliers for the layer-1 output at step t. Keyed by direction,
// sequence id, step, and element, never by batch position.
void fill_masks(const DropoutPlan& drop, const ChunkContext& ctx,
                std::size_t t, std::size_t n, Eigen::MatrixXd& mask) {
    const Eigen::Index hd = mask.cols();
    for (std::size_t r = 0; r < n; ++r) {
        std::uint64_t key =
            (static_cast<std::uint64_t>(ctx.rows[r].dir) << 32) | ctx.rows[r].seq;
        for (Eigen::Index e = 0; e < hd; ++e)
            mask(static_cast<Eigen::Index>(r), e) =
                drop.mask(kDropEncoderInterLayer, key, t, static_cast<std::uint64_t>(e));
    }
}

// Runs the chunk forward. When traces is non-null every step is recorded.
// Final top-layer states are written into features (+=).
void chunk_forward(const ModelParams& p, const ChunkContext& ctx,
                   const DropoutPlan& drop, Eigen::MatrixXd& features,
                   std::vector<StepTrace>* traces) {
    const Eigen::Index hd = static_cast<Eigen::Index>(p.cfg.hidden_dim);
    const Eigen::Index n_rows = static_cast<Eigen::Index>(ctx.rows.size());

    Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd h2 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd c2 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd x, l2in, mask;

    if (traces) traces->resize(ctx.maxlen);

    for (std::size_t t = 0; t < ctx.maxlen; ++t) {
        const std::size_t n = ctx.active[t];
        const Eigen::Index ni = static_cast<Eigen::Index>(n);

        x.resize(ni, p.embed.cols());
        for (std::size_t r = 0; r < n; ++r)
            x.row(static_cast<Eigen::Index>(r)) = p.embed.row(ctx.toks[r][t]);

        StepTrace* st = traces ? &(*traces)[t] : nullptr;
        layer_step(p.enc1, x, h1, c1, n, st ? &st->l1 : nullptr);

        l2in = h1.topRows(ni);
        if (drop.active()) {
            mask.resize(ni, hd);
            fill_masks(drop, ctx, t, n, mask);
            l2in = l2in.cwiseProduct(mask);
        }
        if (st) st->l2_input = l2in;

        layer_step(p.enc2, l2in, h2, c2, n, st ? &st->l2 : nullptr);

        // Rows whose sequence ends at this step emit their final states.
        std::size_t n_next = t + 1 < ctx.maxlen ? ctx.active[t + 1] : 0;
        for (std::size_t r = n_next; r < n; ++r) {
            Eigen::Index out = static_cast<Eigen::Index>(ctx.rows[r].seq);
            features.row(out).head(hd) += h2.row(static_cast<Eigen::Index>(r));
            features.row(out).tail(hd) += c2.row(static_cast<Eigen::Index>(r));
        }
    }
}

// One layer's BPTT step. Consumes dh/dc for this step, emits gradients for
// the previous step in place, plus the gradient w.r.t. this step's input.
void layer_backward_step(const RecurrentLayer& layer, const LayerTrace& trace,
                         const Eigen::MatrixXd& input, Eigen::MatrixXd& dh,
                         Eigen::MatrixXd& dc, std::size_t n,
                         RecurrentLayer& grad, Eigen::MatrixXd& d_input) {
    const Eigen::Index ni = static_cast<Eigen::Index>(n);
    const Eigen::Index hd = layer.w_recur.cols();

    auto gi = trace.gates.leftCols(hd).array();
    auto gf = trace.gates.middleCols(hd, hd).array();
    auto gg = trace.gates.middleCols(2 * hd, hd).array();
    auto go = trace.gates.rightCols(hd).array();

    Eigen::ArrayXXd tanh_c = trace.c.array().tanh();
    auto dh_a = dh.topRows(ni).array();
    Eigen::ArrayXXd dc_total =
        dc.topRows(ni).array() + dh_a * go * (1.0 - tanh_c.square());

    Eigen::MatrixXd dpre(ni, 4 * hd);
    dpre.leftCols(hd) = (dc_total * gg * gi * (1.0 - gi)).matrix();
    dpre.middleCols(hd, hd) =
        (dc_total * trace.c_prev.array() * gf * (1.0 - gf)).matrix();
    dpre.middleCols(2 * hd, hd) = (dc_total * gi * (1.0 - gg.square())).matrix();
    dpre.rightCols(hd) = (dh_a * tanh_c * go * (1.0 - go)).matrix();

    grad.w_input.noalias() += dpre.transpose() * input;
    grad.w_recur.noalias() += dpre.transpose() * trace.h_prev;
    grad.bias += dpre.colwise().sum().transpose();

    d_input.noalias() = dpre * layer.w_input;
    dh.topRows(ni).noalias() = dpre * layer.w_recur;
    dc.topRows(ni) = (dc_total * gf).matrix();
}

void chunk_backward(const ModelParams& p, const ChunkContext& ctx,
                    const DropoutPlan& drop, const Eigen::MatrixXd& d_features,
                    ModelParams& grads) {
    std::vector<StepTrace> traces;
    Eigen::MatrixXd scratch_features =
        Eigen::MatrixXd::Zero(d_features.rows(), d_features.cols());
    chunk_forward(p, ctx, drop, scratch_features, &traces);

    const Eigen::Index hd = static_cast<Eigen::Index>(p.cfg.hidden_dim);
    const Eigen::Index n_rows = static_cast<Eigen::Index>(ctx.rows.size());

    Eigen::MatrixXd dh1 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd dc1 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd dh2 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd dc2 = Eigen::MatrixXd::Zero(n_rows, hd);
    Eigen::MatrixXd d_l2in, dx, mask;

    for (std::size_t ts = ctx.maxlen; ts > 0; --ts) {
        const std::size_t t = ts - 1;
        const std::size_t n = ctx.active[t];
        const Eigen::Index ni = static_cast<Eigen::Index>(n);
        const StepTrace& st = traces[t];

        // Rows ending here receive their feature gradient now.
        std::size_t n_next = t + 1 < ctx.maxlen ? ctx.active[t + 1] : 0;
        for (std::size_t r = n_next; r < n; ++r) {
            Eigen::Index src = static_cast<Eigen::Index>(ctx.rows[r].seq);
            dh2.row(static_cast<Eigen::Index>(r)) +=
                d_features.row(src).head(hd);
            dc2.row(static_cast<Eigen::Index>(r)) +=
                d_features.row(src).tail(hd);
        }

        layer_backward_step(p.enc2, st.l2, st.l2_input, dh2, dc2, n,
                            grads.enc2, d_l2in);
        if (drop.active()) {
            mask.resize(ni, hd);
            fill_masks(drop, ctx, t, n, mask);
            d_l2in = d_l2in.cwiseProduct(mask);
        }
        dh1.topRows(ni) += d_l2in;

        Eigen::MatrixXd x(ni, p.embed.cols());
        for (std::size_t r = 0; r < n; ++r)
            x.row(static_cast<Eigen::Index>(r)) = p.embed.row(ctx.toks[r][t]);
        layer_backward_step(p.enc1, st.l1, x, dh1, dc1, n, grads.enc1, dx);
        for (std::size_t r = 0; r < n; ++r)
            grads.embed.row(ctx.toks[r][t]) += dx.row(static_cast<Eigen::Index>(r));
    }
}

}  // namespace

Eigen::MatrixXd encode_sequences(const ModelParams& p,
                                 const SequenceTable& table,
                                 const DropoutPlan& drop) {
    Eigen::MatrixXd features = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(table.size()),
        static_cast<Eigen::Index>(p.cfg.feature_dim()));
    for (auto [begin, end] : plan_chunks(table)) {
        ChunkContext ctx = build_context(table, begin, end);
        chunk_forward(p, ctx, drop, features, nullptr);
    }
    return features;
}

void encode_sequences_backward(const ModelParams& p, const SequenceTable& table,
                               const DropoutPlan& drop,
                               const Eigen::MatrixXd& d_features,
                               ModelParams& grads) {
    if (d_features.rows() != static_cast<Eigen::Index>(table.size()) ||
        d_features.cols() != static_cast<Eigen::Index>(p.cfg.feature_dim()))
        throw DimensionError("feature gradient shape mismatch");
    for (auto [begin, end] : plan_chunks(table)) {
        ChunkContext ctx = build_context(table, begin, end);
        chunk_backward(p, ctx, drop, d_features, grads);
    }
}

}  // namespace cyclekit
