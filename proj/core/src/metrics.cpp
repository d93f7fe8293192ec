#include "cyclekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cyclekit/error.hpp"

namespace cyclekit {

double average_precision(const Eigen::VectorXd& scores,
                         const std::vector<std::uint8_t>& labels) {
    if (static_cast<std::size_t>(scores.size()) != labels.size())
        throw DimensionError("score and label counts differ");
    std::size_t positives =
        static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (positives == 0)
        throw UndefinedMetricError("average precision needs a positive");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return scores(static_cast<Eigen::Index>(a)) >
                                scores(static_cast<Eigen::Index>(b));
                     });

    double sum = 0.0;
    std::size_t seen_pos = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (!labels[order[rank]]) continue;
        ++seen_pos;
        sum += static_cast<double>(seen_pos) / static_cast<double>(rank + 1);
    }
    return sum / static_cast<double>(positives);
}

bool hits_at_k(double pos_score, std::span<const double> neg_scores,
               std::size_t k) {
    std::size_t above = 0, tied = 0;
    for (double s : neg_scores) {
        if (s > pos_score)
            ++above;
        else if (s == pos_score)
            ++tied;
    }
    std::size_t rank = 1 + above + tied / 2;
    return rank <= k;
}

double grouped_hits_at_k(const Eigen::VectorXd& scores, const TargetSet& set,
                         std::size_t k) {
    const std::size_t r = set.negatives_per_positive;
    const std::size_t group = 1 + r;
    if (static_cast<std::size_t>(scores.size()) != set.targets.size() ||
        set.targets.size() != set.labels.size())
        throw DimensionError("scores do not align with the target set");
    if (r == 0 || set.targets.size() % group != 0)
        throw DimensionError("target set is not grouped by positive");

    const std::size_t groups = set.targets.size() / group;
    std::size_t hits = 0;
    std::vector<double> negs(r);
    for (std::size_t g = 0; g < groups; ++g) {
        std::size_t base = g * group;
        if (set.labels[base] != 1)
            throw DimensionError("group does not start with a positive");
        for (std::size_t j = 0; j < r; ++j) {
            if (set.labels[base + 1 + j] != 0)
                throw DimensionError("group has a mislabeled negative");
            negs[j] = scores(static_cast<Eigen::Index>(base + 1 + j));
        }
        hits += hits_at_k(scores(static_cast<Eigen::Index>(base)), negs, k);
    }
    return static_cast<double>(hits) / static_cast<double>(groups);
}

ShortnessHistogram shortness_histogram(std::span<const BasisBundle> bases,
                                       const std::vector<EdgeId>& targets) {
    ShortnessHistogram hist;
    hist.finite_mean = std::numeric_limits<double>::quiet_NaN();
    if (targets.empty()) return hist;

    constexpr std::uint32_t kUncovered =
        std::numeric_limits<std::uint32_t>::max();
    std::size_t covered = 0;
    double length_sum = 0.0;
    std::map<std::uint32_t, std::size_t> counts;
    for (EdgeId e : targets) {
        std::uint32_t best = kUncovered;
        for (const BasisBundle& bundle : bases) {
            if (e >= bundle.incidence.rows()) continue;
            for (std::uint32_t j : bundle.incidence.row(e))
                best = std::min(best, bundle.basis.cycle_length[j]);
        }
        if (best == kUncovered) {
            hist.uncovered += 1.0;
        } else {
            ++counts[best];
            ++covered;
            length_sum += best;
        }
    }
    const double n = static_cast<double>(targets.size());
    for (auto [len, count] : counts)
        hist.bins[len] = static_cast<double>(count) / n;
    hist.uncovered /= n;
    if (covered > 0) hist.finite_mean = length_sum / static_cast<double>(covered);
    return hist;
}

void PhaseTimer::start(const std::string& phase) {
    stop();
    running_ = phases_.size();
    for (std::size_t i = 0; i < phases_.size(); ++i)
        if (phases_[i].first == phase) {
            running_ = i;
            break;
        }
    if (running_ == phases_.size()) phases_.emplace_back(phase, 0.0);
    started_ = std::chrono::steady_clock::now();
}

void PhaseTimer::stop() {
    if (running_ == static_cast<std::size_t>(-1)) return;
    auto elapsed = std::chrono::steady_clock::now() - started_;
    phases_[running_].second +=
        std::chrono::duration_cast<std::chrono::duration<double>>(elapsed)
            .count();
    running_ = static_cast<std::size_t>(-1);
}

double PhaseTimer::total() const {
    double sum = 0.0;
    for (const auto& [name, seconds] : phases_) sum += seconds;
    return sum;
}

}  // namespace cyclekit
