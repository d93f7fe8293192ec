#include "cyclekit/cycle_graph.hpp"

#include <algorithm>

#include "cyclekit/error.hpp"

namespace cyclekit {

std::uint32_t OverlapMatrix::count(std::size_t i, std::size_t j) const {
    const auto& row = rows_[i];
    auto it = std::lower_bound(
        row.begin(), row.end(), static_cast<std::uint32_t>(j),
        [](const auto& entry, std::uint32_t key) { return entry.first < key; });
    if (it == row.end() || it->first != j) return 0;
    return it->second;
}

OverlapMatrix cycle_overlap(const IncidenceMatrix& ct) {
    std::size_t beta = ct.cols();
    OverlapMatrix overlap(beta);

    std::vector<std::uint32_t> counter(beta, 0);
    std::vector<std::uint32_t> touched;
    for (std::size_t i = 0; i < beta; ++i) {
        touched.clear();
        for (std::uint32_t e : ct.column(i)) {
            for (std::uint32_t j : ct.row(e)) {
                if (counter[j] == 0) touched.push_back(j);
                ++counter[j];
            }
        }
        std::sort(touched.begin(), touched.end());
        std::vector<std::pair<std::uint32_t, std::uint32_t>> row;
        row.reserve(touched.size());
        for (std::uint32_t j : touched) {
            row.emplace_back(j, counter[j]);
            counter[j] = 0;
        }
        overlap.set_row(i, std::move(row));
    }
    return overlap;
}

CycleGraph build_cycle_graph(const OverlapMatrix& overlap, std::size_t m) {
    CycleGraph cg;
    cg.num_nodes = overlap.size();
    if (m == 0) return cg;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (u, v), u < v
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cand;
    for (std::size_t i = 0; i < overlap.size(); ++i) {
        cand.clear();
        for (const auto& [j, c] : overlap.row(i)) {
            if (j == i || c == 0) continue;
            cand.emplace_back(j, c);
        }
        // Top-m by count descending, index ascending on ties.
        std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        std::size_t take = std::min(m, cand.size());
        for (std::size_t t = 0; t < take; ++t) {
            std::uint32_t u = static_cast<std::uint32_t>(i);
            std::uint32_t v = cand[t].first;
            pairs.emplace_back(std::min(u, v), std::max(u, v));
        }
    }

    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    cg.edges = std::move(pairs);
    cg.overlap.reserve(cg.edges.size());
    for (const auto& [u, v] : cg.edges) cg.overlap.push_back(overlap.count(u, v));
    return cg;
}

}  // namespace cyclekit
