#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cyclekit/model.hpp"
#include "cyclekit/pipeline.hpp"

namespace cyclekit {

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t patience = 20;  // epochs without a new best before stopping
    double lr = 0.005;
    double weight_decay = 5e-5;
    double dropout = 0.2;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double loss = 0.0;      // full-batch training loss, dropout active
    double train_auc_pr = 0.0;  // evaluated after the step, dropout off
};

struct TrainResult {
    ModelParams params;  // snapshot of the best epoch
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_auc_pr = 0.0;
    bool stopped_early = false;
};

// Full-batch training with adaptive moments and early stopping on the
// training-split area under the precision-recall curve. Deterministic for a
// fixed seed: init, per-epoch dropout plans, and reduction orders are all
// derived from it. Non-finite losses or gradients abort with the epoch in
// the diagnostic.
TrainResult train_model(const PreparedInstance& inst, const ModelConfig& mcfg,
                        const TrainConfig& tcfg,
                        const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace cyclekit
