#include "cyclekit/trainer.hpp"

#include <cmath>
#include <string>

#include "cyclekit/error.hpp"
#include "cyclekit/metrics.hpp"
#include "cyclekit/rng.hpp"

namespace cyclekit {

TrainResult train_model(const PreparedInstance& inst, const ModelConfig& mcfg,
                        const TrainConfig& tcfg,
                        const std::function<void(const EpochRecord&)>& on_epoch) {
    if (mcfg.num_relations != inst.graph.num_relations())
        throw ConfigError("model vocabulary does not match the instance");
    if (mcfg.num_bases < inst.bases.size())
        throw ConfigError("fewer mixing logits than bases");
    if (tcfg.epochs == 0) throw ConfigError("training needs at least one epoch");

    ModelParams params = ModelParams::init(mcfg, tcfg.seed);
    AdamOptimizer opt(params, tcfg.lr, tcfg.weight_decay);
    const DropoutPlan eval_plan;  // dropout disabled

    TrainResult result;
    result.params = params;
    result.best_auc_pr = -1.0;
    std::size_t stale = 0;

    for (std::size_t e = 0; e < tcfg.epochs; ++e) {
        const std::size_t epoch = e + 1;
        DropoutPlan plan;
        plan.enabled = tcfg.dropout > 0.0;
        plan.rate = tcfg.dropout;
        plan.seed = derive_seed(tcfg.seed, e);

        ForwardState state;
        PredictionBatch batch = model_forward(params, inst, plan, &state);
        if (!std::isfinite(batch.loss))
            throw GradientError("non-finite loss at epoch " +
                                std::to_string(epoch));
        ModelParams grads = model_backward(params, inst, plan, state);
        try {
            opt.step(params, grads);
        } catch (const GradientError& err) {
            throw GradientError(std::string(err.what()) + " at epoch " +
                                std::to_string(epoch));
        }

        PredictionBatch eval = model_forward(params, inst, eval_plan, nullptr);
        EpochRecord record;
        record.epoch = epoch;
        record.loss = batch.loss;
        record.train_auc_pr = average_precision(eval.y_final, inst.labels);
        result.history.push_back(record);
        if (on_epoch) on_epoch(record);

        if (record.train_auc_pr > result.best_auc_pr) {
            result.best_auc_pr = record.train_auc_pr;
            result.best_epoch = epoch;
            result.params = params;
            stale = 0;
        } else if (++stale >= tcfg.patience) {
            result.stopped_early = true;
            break;
        }
    }
    return result;
}

}  // namespace cyclekit
