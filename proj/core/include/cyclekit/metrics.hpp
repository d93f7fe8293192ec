#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cyclekit/kg.hpp"
#include "cyclekit/spt.hpp"

namespace cyclekit {

// Average precision: sort by score descending with ties kept in input
// order, accumulate precision at each positive. This is the AP estimator,
// not a trapezoidal interpolation, so reruns are comparable.
double average_precision(const Eigen::VectorXd& scores,
                         const std::vector<std::uint8_t>& labels);

// Rank of the positive among its negatives with half-credit ties:
// rank = 1 + #{neg > pos} + floor(#{neg == pos} / 2). Hit iff rank <= k.
bool hits_at_k(double pos_score, std::span<const double> neg_scores,
               std::size_t k);

// Mean hit rate over a grouped target set laid out as
// [pos, its negatives...] per positive, scores aligned with set.targets.
double grouped_hits_at_k(const Eigen::VectorXd& scores, const TargetSet& set,
                         std::size_t k);

// Distribution of the shortest covering cycle length per target, minimized
// over all bases. Targets covered by no cycle anywhere land in the
// uncovered share. Proportions cover all targets and sum to 1.
struct ShortnessHistogram {
    std::map<std::uint32_t, double> bins;
    double uncovered = 0.0;
    // Mean over covered targets only; NaN when nothing is covered.
    double finite_mean = 0.0;
};

ShortnessHistogram shortness_histogram(std::span<const BasisBundle> bases,
                                       const std::vector<EdgeId>& targets);

// Wall-clock accumulator. Phases keep insertion order; re-entering a phase
// adds to its total.
class PhaseTimer {
public:
    void start(const std::string& phase);
    void stop();

    const std::vector<std::pair<std::string, double>>& phases() const {
        return phases_;
    }
    double total() const;

private:
    std::vector<std::pair<std::string, double>> phases_;
    std::size_t running_ = static_cast<std::size_t>(-1);
    std::chrono::steady_clock::time_point started_;
};

}  // namespace cyclekit
