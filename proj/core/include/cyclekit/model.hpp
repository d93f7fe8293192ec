#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace cyclekit {

struct ModelConfig {
    std::size_t num_relations = 0;  // base vocabulary R; token ids span 2R
    std::size_t embed_dim = 20;
    std::size_t hidden_dim = 10;    // per direction; cycle features are 2x this
    std::size_t gcn_hidden = 20;
    std::size_t gcn_out = 20;
    std::size_t mlp_hidden = 20;
    std::size_t num_bases = 20;     // mixing logit count (the configured k)
    double dropout = 0.2;

    std::size_t feature_dim() const { return 2 * hidden_dim; }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// One recurrent layer: pre-activations are w_input x + w_recur h + bias with
// rows split into [input; forget; cell; output] gate blocks of hidden_dim.
struct RecurrentLayer {
    Eigen::MatrixXd w_input;  // 4h x in_dim
    Eigen::MatrixXd w_recur;  // 4h x h
    Eigen::VectorXd bias;     // 4h
};

struct ModelParams {
    ModelConfig cfg;
    Eigen::MatrixXd embed;   // 2R x embed_dim, one row per directed token
    RecurrentLayer enc1;     // shared by both walk directions
    RecurrentLayer enc2;
    Eigen::MatrixXd gcn_w1;  // feature_dim x gcn_hidden
    Eigen::MatrixXd gcn_w2;  // gcn_hidden x gcn_out
    Eigen::MatrixXd mlp_w1;  // gcn_out x mlp_hidden
    Eigen::VectorXd mlp_b1;  // mlp_hidden
    Eigen::VectorXd mlp_w2;  // mlp_hidden
    double mlp_b2 = 0.0;
    Eigen::VectorXd mixing_logits;  // num_bases, softmax-normalized at use

    // Glorot-uniform weights, zero biases and logits, in a fixed draw order.
    static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);
    static ModelParams zeros_like(const ModelParams& other);

    std::size_t num_parameters() const;
    void set_zero();

    // Name of the first tensor holding a non-finite value, or empty.
    std::string first_nonfinite() const;
};

// Visit every tensor as (name, data pointer, element count), in a fixed
// order shared by the optimizer, checkpoints, and the gradient checker.
template <typename Params, typename F>
void visit_tensors(Params& p, F&& f) {
    f("embed", p.embed.data(), static_cast<std::size_t>(p.embed.size()));
    f("enc1_w_input", p.enc1.w_input.data(),
      static_cast<std::size_t>(p.enc1.w_input.size()));
    f("enc1_w_recur", p.enc1.w_recur.data(),
      static_cast<std::size_t>(p.enc1.w_recur.size()));
    f("enc1_bias", p.enc1.bias.data(),
      static_cast<std::size_t>(p.enc1.bias.size()));
    f("enc2_w_input", p.enc2.w_input.data(),
      static_cast<std::size_t>(p.enc2.w_input.size()));
    f("enc2_w_recur", p.enc2.w_recur.data(),
      static_cast<std::size_t>(p.enc2.w_recur.size()));
    f("enc2_bias", p.enc2.bias.data(),
      static_cast<std::size_t>(p.enc2.bias.size()));
    f("gcn_w1", p.gcn_w1.data(), static_cast<std::size_t>(p.gcn_w1.size()));
    f("gcn_w2", p.gcn_w2.data(), static_cast<std::size_t>(p.gcn_w2.size()));
    f("mlp_w1", p.mlp_w1.data(), static_cast<std::size_t>(p.mlp_w1.size()));
    f("mlp_b1", p.mlp_b1.data(), static_cast<std::size_t>(p.mlp_b1.size()));
    f("mlp_w2", p.mlp_w2.data(), static_cast<std::size_t>(p.mlp_w2.size()));
    f("mlp_b2", &p.mlp_b2, std::size_t{1});
    f("mixing_logits", p.mixing_logits.data(),
      static_cast<std::size_t>(p.mixing_logits.size()));
}

// Element masks for deterministic dropout: a pure function of the plan seed
// and the element's stable coordinates, so masks never depend on chunking or
// thread layout.
struct DropoutPlan {
    bool enabled = false;
    double rate = 0.0;
    std::uint64_t seed = 0;  // pre-mixed with the epoch by the caller

    bool active() const { return enabled && rate > 0.0; }
    // Inverted-dropout multiplier: 0 or 1/(1-rate).
    double mask(std::uint64_t tag, std::uint64_t a, std::uint64_t b,
                std::uint64_t c) const;
};

inline constexpr std::uint64_t kDropEncoderInterLayer = 1;
inline constexpr std::uint64_t kDropGcnLayer1 = 2;
inline constexpr std::uint64_t kDropGcnLayer2 = 3;

// Adam with PyTorch-style L2 weight decay (decay added to the gradient
// before the moment updates). Rejects non-finite gradients by tensor name.
class AdamOptimizer {
public:
    AdamOptimizer(const ModelParams& reference, double lr, double weight_decay,
                  double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(ModelParams& params, const ModelParams& grads);

    std::size_t steps_taken() const { return t_; }

private:
    double lr_, wd_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    ModelParams m_, v_;
};

}  // namespace cyclekit
