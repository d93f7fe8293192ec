#include "cyclekit/model.hpp"

#include <cmath>
#include <vector>

#include "cyclekit/error.hpp"
#include "cyclekit/rng.hpp"

namespace cyclekit {

namespace {

void glorot_fill(Eigen::MatrixXd& m, std::size_t fan_in, std::size_t fan_out,
                 Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rng.uniform(-limit, limit);
}

RecurrentLayer make_layer(std::size_t in_dim, std::size_t hidden, Rng& rng) {
    RecurrentLayer layer;
    layer.w_input.resize(static_cast<Eigen::Index>(4 * hidden),
                         static_cast<Eigen::Index>(in_dim));
    layer.w_recur.resize(static_cast<Eigen::Index>(4 * hidden),
                         static_cast<Eigen::Index>(hidden));
    glorot_fill(layer.w_input, in_dim, hidden, rng);
    glorot_fill(layer.w_recur, hidden, hidden, rng);
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(4 * hidden));
    return layer;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed) {
    if (cfg.num_relations == 0)
        throw DimensionError("model requires a non-empty relation vocabulary");
    Rng rng(derive_seed(seed, 0x696e6974ULL));
    ModelParams p;
    p.cfg = cfg;

    p.embed.resize(static_cast<Eigen::Index>(2 * cfg.num_relations),
                   static_cast<Eigen::Index>(cfg.embed_dim));
    glorot_fill(p.embed, 2 * cfg.num_relations, cfg.embed_dim, rng);

    p.enc1 = make_layer(cfg.embed_dim, cfg.hidden_dim, rng);
    p.enc2 = make_layer(cfg.hidden_dim, cfg.hidden_dim, rng);

    p.gcn_w1.resize(static_cast<Eigen::Index>(cfg.feature_dim()),
                    static_cast<Eigen::Index>(cfg.gcn_hidden));
    glorot_fill(p.gcn_w1, cfg.feature_dim(), cfg.gcn_hidden, rng);
    p.gcn_w2.resize(static_cast<Eigen::Index>(cfg.gcn_hidden),
                    static_cast<Eigen::Index>(cfg.gcn_out));
    glorot_fill(p.gcn_w2, cfg.gcn_hidden, cfg.gcn_out, rng);

    p.mlp_w1.resize(static_cast<Eigen::Index>(cfg.gcn_out),
                    static_cast<Eigen::Index>(cfg.mlp_hidden));
    glorot_fill(p.mlp_w1, cfg.gcn_out, cfg.mlp_hidden, rng);
    p.mlp_b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.mlp_hidden));
    Eigen::MatrixXd w2(static_cast<Eigen::Index>(cfg.mlp_hidden), 1);
    glorot_fill(w2, cfg.mlp_hidden, 1, rng);
    p.mlp_w2 = w2.col(0);
    p.mlp_b2 = 0.0;

    p.mixing_logits =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.num_bases));
    return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
    ModelParams p = other;
    p.set_zero();
    return p;
}

void ModelParams::set_zero() {
    visit_tensors(*this, [](const char*, double* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) data[i] = 0.0;
    });
}

std::size_t ModelParams::num_parameters() const {
    std::size_t total = 0;
    visit_tensors(*this, [&](const char*, const double*, std::size_t n) {
        total += n;
    });
    return total;
}

std::string ModelParams::first_nonfinite() const {
    std::string bad;
    visit_tensors(*this, [&](const char* name, const double* data,
                             std::size_t n) {
        if (!bad.empty()) return;
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(data[i])) {
                bad = name;
                return;
            }
    });
    return bad;
}

double DropoutPlan::mask(std::uint64_t tag, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) const {
    if (!active()) return 1.0;
    double keep = 1.0 - rate;
    double u = counter_real(seed, tag, a, b, c);
    return u < keep ? 1.0 / keep : 0.0;
}

AdamOptimizer::AdamOptimizer(const ModelParams& reference, double lr,
                             double weight_decay, double beta1, double beta2,
                             double eps)
    : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(ModelParams::zeros_like(reference)),
      v_(ModelParams::zeros_like(reference)) {}

void AdamOptimizer::step(ModelParams& params, const ModelParams& grads) {
    std::string bad = grads.first_nonfinite();
    if (!bad.empty())
        throw GradientError("non-finite gradient in tensor " + bad);

    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

    struct Slot {
        double* p;
        const double* g;
        double* m;
        double* v;
        std::size_t n;
    };
    std::vector<Slot> slots;
    visit_tensors(params, [&](const char*, double* data, std::size_t n) {
        slots.push_back({data, nullptr, nullptr, nullptr, n});
    });
    std::size_t idx = 0;
    visit_tensors(const_cast<ModelParams&>(grads),
                  [&](const char*, double* data, std::size_t) {
                      slots[idx++].g = data;
                  });
    idx = 0;
    visit_tensors(m_, [&](const char*, double* data, std::size_t) {
        slots[idx++].m = data;
    });
    idx = 0;
    visit_tensors(v_, [&](const char*, double* data, std::size_t) {
        slots[idx++].v = data;
    });

    for (const Slot& s : slots) {
        for (std::size_t i = 0; i < s.n; ++i) {
            double g = s.g[i] + wd_ * s.p[i];
            s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g;
            s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
            double mhat = s.m[i] / bc1;
            double vhat = s.v[i] / bc2;
            s.p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

}  // namespace cyclekit
