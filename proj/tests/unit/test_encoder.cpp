#include "cyclekit/encoder.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "cyclekit/error.hpp"
#include "cyclekit/rng.hpp"

using namespace cyclekit;

namespace {

// Reference implementation: one sequence at a time, plain vector math.
void naive_step(const RecurrentLayer& l, const Eigen::VectorXd& x,
                Eigen::VectorXd& h, Eigen::VectorXd& c) {
    const Eigen::Index hd = l.w_recur.cols();
    Eigen::VectorXd pre = l.w_input * x + l.w_recur * h + l.bias;
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    Eigen::VectorXd c_new(hd), h_new(hd);
    for (Eigen::Index k = 0; k < hd; ++k) {
        double gi = sig(pre(k));
        double gf = sig(pre(hd + k));
        double gg = std::tanh(pre(2 * hd + k));
        double go = sig(pre(3 * hd + k));
        c_new(k) = gf * c(k) + gi * gg;
        h_new(k) = go * std::tanh(c_new(k));
    }
    c = c_new;
    h = h_new;
}

Eigen::VectorXd naive_direction(const ModelParams& p,
                                const std::vector<RelationId>& toks,
                                std::uint32_t seq, std::uint8_t dir,
                                const DropoutPlan& drop) {
    const Eigen::Index hd = static_cast<Eigen::Index>(p.cfg.hidden_dim);
    Eigen::VectorXd h1 = Eigen::VectorXd::Zero(hd);
    Eigen::VectorXd c1 = h1, h2 = h1, c2 = h1;
    for (std::size_t t = 0; t < toks.size(); ++t) {
        Eigen::VectorXd x = p.embed.row(toks[t]).transpose();
        naive_step(p.enc1, x, h1, c1);
        Eigen::VectorXd in2 = h1;
        if (drop.active()) {
            std::uint64_t key = (static_cast<std::uint64_t>(dir) << 32) | seq;
            for (Eigen::Index e = 0; e < hd; ++e)
                in2(e) *= drop.mask(kDropEncoderInterLayer, key, t,
                                    static_cast<std::uint64_t>(e));
        }
        naive_step(p.enc2, in2, h2, c2);
    }
    Eigen::VectorXd out(2 * hd);
    out << h2, c2;
    return out;
}

Eigen::MatrixXd naive_encode(const ModelParams& p, const SequenceTable& table,
                             const DropoutPlan& drop) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(table.size()),
        static_cast<Eigen::Index>(p.cfg.feature_dim()));
    for (std::uint32_t q = 0; q < table.size(); ++q) {
        const auto& s1 = table.tokens(q);
        f.row(q) += naive_direction(p, s1, q, 0, drop).transpose();
        auto s2 = reverse_rotation(s1, table.num_relations());
        f.row(q) += naive_direction(p, s2, q, 1, drop).transpose();
    }
    return f;
}

SequenceTable random_table(std::size_t num_relations, std::size_t count,
                           std::size_t max_len, std::uint64_t seed) {
    SequenceTable table(num_relations);
    Rng rng(seed);
    while (table.size() < count) {
        std::vector<RelationId> toks(1 + rng.below(max_len));
        for (auto& t : toks)
            t = static_cast<RelationId>(rng.below(2 * num_relations));
        table.intern(std::move(toks));
    }
    return table;
}

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.num_relations = 5;
    cfg.embed_dim = 7;
    cfg.hidden_dim = 4;
    return cfg;
}

}  // namespace

TEST_CASE("batched encoder matches the per-sequence reference") {
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, 31);
    DropoutPlan off;
    for (std::uint64_t trial = 0; trial < 4; ++trial) {
        SequenceTable table = random_table(cfg.num_relations, 9, 11, 100 + trial);
        Eigen::MatrixXd got = encode_sequences(p, table, off);
        Eigen::MatrixXd want = naive_encode(p, table, off);
        REQUIRE(got.rows() == want.rows());
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("encoder handles single-token sequences") {
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, 8);
    SequenceTable table(cfg.num_relations);
    table.intern({3});
    table.intern({7});
    DropoutPlan off;
    Eigen::MatrixXd got = encode_sequences(p, table, off);
    Eigen::MatrixXd want = naive_encode(p, table, off);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(got.rows() == 2);
    CHECK(got.cols() == 8);
}

TEST_CASE("chunked processing agrees with the reference across chunk seams") {
    // Enough token mass to force several chunks under the fixed budget.
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, 77);
    SequenceTable table = random_table(cfg.num_relations, 4200, 9, 500);
    std::size_t total = 0;
    for (std::uint32_t q = 0; q < table.size(); ++q)
        total += table.tokens(q).size();
    REQUIRE(total > 16384);

    DropoutPlan off;
    Eigen::MatrixXd got = encode_sequences(p, table, off);
    Eigen::MatrixXd want = naive_encode(p, table, off);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dropout masks apply identically in batched and reference paths") {
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, 13);
    SequenceTable table = random_table(cfg.num_relations, 12, 10, 900);
    DropoutPlan drop;
    drop.enabled = true;
    drop.rate = 0.3;
    drop.seed = 4242;

    Eigen::MatrixXd got = encode_sequences(p, table, drop);
    Eigen::MatrixXd want = naive_encode(p, table, drop);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);

    // Same plan twice is bit-identical; a different seed changes the output.
    Eigen::MatrixXd again = encode_sequences(p, table, drop);
    CHECK(got == again);
    DropoutPlan other = drop;
    other.seed = 4243;
    CHECK((encode_sequences(p, table, other) - got).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("empty table encodes to an empty feature matrix") {
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, 3);
    SequenceTable table(cfg.num_relations);
    DropoutPlan off;
    Eigen::MatrixXd f = encode_sequences(p, table, off);
    CHECK(f.rows() == 0);
    CHECK(f.cols() == 8);
    ModelParams grads = ModelParams::zeros_like(p);
    encode_sequences_backward(p, table, off, f, grads);
    CHECK(grads.embed.isZero());
}

TEST_CASE("backward rejects a mis-shaped feature gradient") {
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, 3);
    SequenceTable table(cfg.num_relations);
    table.intern({0, 1});
    ModelParams grads = ModelParams::zeros_like(p);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 5);
    DropoutPlan off;
    CHECK_THROWS_AS(encode_sequences_backward(p, table, off, bad, grads),
                    DimensionError);
}

namespace {

// Central-difference check of every tensor the encoder touches. Loss is a
// fixed linear functional of the features so its gradient is d_features.
void run_fd_check(const DropoutPlan& drop, std::uint64_t seed) {
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, seed);
    SequenceTable table = random_table(cfg.num_relations, 6, 7, seed + 1);

    Rng rng(seed + 2);
    Eigen::MatrixXd d(static_cast<Eigen::Index>(table.size()), 8);
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) d(i, j) = rng.normal();

    ModelParams grads = ModelParams::zeros_like(p);
    encode_sequences_backward(p, table, drop, d, grads);

    auto loss = [&]() {
        return (encode_sequences(p, table, drop).array() * d.array()).sum();
    };

    struct View {
        std::string name;
        double* param;
        const double* grad;
        std::size_t size;
    };
    std::vector<View> tensors;
    visit_tensors(p, [&](const char* name, double* data, std::size_t n) {
        tensors.push_back({name, data, nullptr, n});
    });
    std::size_t slot = 0;
    visit_tensors(grads, [&](const char*, double* data, std::size_t) {
        tensors[slot++].grad = data;
    });

    const double h = 1e-5;
    for (const View& tv : tensors) {
        bool encoder_tensor = tv.name == "embed" || tv.name.rfind("enc", 0) == 0;
        std::size_t probes = std::min<std::size_t>(tv.size, 10);
        for (std::size_t k = 0; k < probes; ++k) {
            std::size_t idx = (k * 7919 + 3) % tv.size;
            double orig = tv.param[idx];
            tv.param[idx] = orig + h;
            double lp = loss();
            tv.param[idx] = orig - h;
            double lm = loss();
            tv.param[idx] = orig;
            double numeric = (lp - lm) / (2.0 * h);
            double analytic = tv.grad[idx];
            double err = std::abs(analytic - numeric);
            double scale = std::max({std::abs(analytic), std::abs(numeric), 1.0});
            INFO(tv.name, "[", idx, "] analytic=", analytic,
                 " numeric=", numeric);
            CHECK(err / scale < 1e-7);
            if (!encoder_tensor) CHECK(analytic == 0.0);
        }
    }
}

}  // namespace

TEST_CASE("encoder gradients match finite differences") {
    DropoutPlan off;
    run_fd_check(off, 51);
}

TEST_CASE("encoder gradients match finite differences under dropout") {
    DropoutPlan drop;
    drop.enabled = true;
    drop.rate = 0.25;
    drop.seed = 99;
    run_fd_check(drop, 52);
}

TEST_CASE("backward accumulates into existing gradient buffers") {
    ModelConfig cfg = small_config();
    ModelParams p = ModelParams::init(cfg, 21);
    SequenceTable table = random_table(cfg.num_relations, 5, 6, 22);
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(
        static_cast<Eigen::Index>(table.size()), 8, 0.5);
    DropoutPlan off;

    ModelParams once = ModelParams::zeros_like(p);
    encode_sequences_backward(p, table, off, d, once);
    ModelParams twice = ModelParams::zeros_like(p);
    encode_sequences_backward(p, table, off, d, twice);
    encode_sequences_backward(p, table, off, d, twice);
    CHECK((twice.embed - 2.0 * once.embed).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((twice.enc1.w_recur - 2.0 * once.enc1.w_recur).cwiseAbs().maxCoeff() <
          1e-12);
}
