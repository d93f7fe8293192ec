#include "cyclekit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "cyclekit/error.hpp"
#include "cyclekit/rng.hpp"

namespace cyclekit {

namespace {

// Local CSR of the normalized adjacency N = D^-1/2 A D^-1/2 restricted to
// `members`. Parallel edges contribute multiplicity weight.
struct LocalOperator {
    std::vector<std::size_t> offset;
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    std::size_t n = 0;

    void matvec_normalized(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t p = offset[i]; p < offset[i + 1]; ++p)
                acc += val[p] * x[col[p]];
            y[static_cast<Eigen::Index>(i)] = acc;
        }
    }
};

LocalOperator build_local_operator(const KnowledgeGraph& g,
                                   const std::vector<EntityId>& members) {
    std::size_t n = members.size();
    std::vector<std::uint32_t> local(g.num_entities(), 0);
    for (std::size_t i = 0; i < n; ++i)
        local[members[i]] = static_cast<std::uint32_t>(i);

    // Parallel edges merge into one entry with multiplicity weight. A dense
    // scratch array collects per-neighbor counts without hashing.
    std::vector<double> deg(n, 0.0);
    std::vector<std::size_t> row_nnz(n, 0);
    std::vector<double> scratch(n, 0.0);
    std::vector<std::uint32_t> touched;

    LocalOperator op;
    op.n = n;
    op.offset.assign(n + 1, 0);
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        EntityId u = members[i];
        touched.clear();
        for (EdgeId e : g.adjacency(u)) {
            std::uint32_t v = local[g.other_endpoint(e, u)];
            if (scratch[v] == 0.0) touched.push_back(v);
            scratch[v] += 1.0;
        }
        std::sort(touched.begin(), touched.end());
        rows[i].reserve(touched.size());
        for (std::uint32_t v : touched) {
            rows[i].emplace_back(v, scratch[v]);
            deg[i] += scratch[v];
            scratch[v] = 0.0;
        }
        row_nnz[i] = rows[i].size();
    }
    for (std::size_t i = 0; i < n; ++i)
        op.offset[i + 1] = op.offset[i] + row_nnz[i];
    op.col.resize(op.offset.back());
    op.val.resize(op.offset.back());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t p = op.offset[i];
        double di = deg[i] > 0.0 ? deg[i] : 1.0;
        for (const auto& [v, w] : rows[i]) {
            double dj = deg[v] > 0.0 ? deg[v] : 1.0;
            op.col[p] = v;
            op.val[p] = w / std::sqrt(di * dj);
            ++p;
        }
    }
    return op;
}

void canonicalize_signs(Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        Eigen::Index best = 0;
        double mag = -1.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            double a = std::abs(m(i, j));
            if (a > mag + 1e-15) {
                mag = a;
                best = i;
            }
        }
        if (m(best, j) < 0.0) m.col(j) = -m.col(j);
    }
}

Eigen::MatrixXd dense_embedding(const LocalOperator& op, std::size_t dim) {
    std::size_t n = op.n;
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(
        static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = op.offset[i]; p < op.offset[i + 1]; ++p)
            lap(static_cast<Eigen::Index>(i), op.col[p]) -= op.val[p];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    return solver.eigenvectors().leftCols(static_cast<Eigen::Index>(dim));
}

// Lanczos on M = I + N (largest eigenpairs of M are the smallest of the
// Laplacian L = I - N). Full reorthogonalization keeps the Krylov basis
// clean; convergence is checked on Ritz residuals every few steps.
Eigen::MatrixXd lanczos_embedding(const LocalOperator& op, std::size_t dim,
                                  std::uint64_t seed) {
    const std::size_t n = op.n;
    const std::size_t cap = std::min(n, std::size_t{320});
    const double tol = 1e-8;

    Rng rng(derive_seed(seed, 0x6c616e637a6f73ULL));
    Eigen::MatrixXd q(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(cap) + 1);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cap));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cap));

    Eigen::VectorXd v0(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v0.size(); ++i) v0[i] = rng.normal();
    v0.normalize();
    q.col(0) = v0;

    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    Eigen::VectorXd nq(static_cast<Eigen::Index>(n));
    std::size_t steps = 0;

    auto ritz_converged = [&](std::size_t m) {
        if (m < dim) return false;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                  static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = alpha[static_cast<Eigen::Index>(i)];
            if (i + 1 < m) {
                t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = beta[static_cast<Eigen::Index>(i)];
                t(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = beta[static_cast<Eigen::Index>(i)];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        double edge = std::abs(beta[static_cast<Eigen::Index>(m - 1)]);
        // Ritz values ascending; the top `dim` must have small residuals.
        for (std::size_t r = 0; r < dim; ++r) {
            Eigen::Index idx = static_cast<Eigen::Index>(m - 1 - r);
            double res = edge * std::abs(es.eigenvectors()(static_cast<Eigen::Index>(m - 1), idx));
            if (res > tol) return false;
        }
        return true;
    };

    for (std::size_t j = 0; j < cap; ++j) {
        op.matvec_normalized(q.col(static_cast<Eigen::Index>(j)), nq);
        w = q.col(static_cast<Eigen::Index>(j)) + nq;  // M q = q + N q
        if (j > 0) w -= beta[static_cast<Eigen::Index>(j - 1)] * q.col(static_cast<Eigen::Index>(j - 1));
        alpha[static_cast<Eigen::Index>(j)] = q.col(static_cast<Eigen::Index>(j)).dot(w);
        w -= alpha[static_cast<Eigen::Index>(j)] * q.col(static_cast<Eigen::Index>(j));
        // Two reorthogonalization sweeps against the full basis.
        auto basis = q.leftCols(static_cast<Eigen::Index>(j + 1));
        w -= basis * (basis.transpose() * w);
        w -= basis * (basis.transpose() * w);

        double b = w.norm();
        steps = j + 1;
        if (b < 1e-10) {
            // Invariant subspace; restart with a fresh orthogonal direction.
            beta[static_cast<Eigen::Index>(j)] = 0.0;
            for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
            w -= basis * (basis.transpose() * w);
            double nb = w.norm();
            if (nb < 1e-12) break;  // the whole space is exhausted
            q.col(static_cast<Eigen::Index>(j + 1)) = w / nb;
        } else {
            beta[static_cast<Eigen::Index>(j)] = b;
            q.col(static_cast<Eigen::Index>(j + 1)) = w / b;
        }
        if ((steps % 10 == 0 || steps == cap) && ritz_converged(steps)) break;
    }

    std::size_t m = steps;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                              static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = alpha[static_cast<Eigen::Index>(i)];
        if (i + 1 < m) {
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = beta[static_cast<Eigen::Index>(i)];
            t(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = beta[static_cast<Eigen::Index>(i)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

    // Top-dim Ritz pairs of M, emitted as ascending Laplacian eigenvalues.
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        Eigen::Index idx = static_cast<Eigen::Index>(m - 1 - r);
        out.col(static_cast<Eigen::Index>(r)) =
            q.leftCols(static_cast<Eigen::Index>(m)) * es.eigenvectors().col(idx);
        out.col(static_cast<Eigen::Index>(r)).normalize();
    }
    return out;
}

}  // namespace

Eigen::MatrixXd spectral_embedding(const KnowledgeGraph& g,
                                   const std::vector<EntityId>& members,
                                   std::size_t dim, std::uint64_t seed) {
    if (members.empty()) return Eigen::MatrixXd(0, 0);
    if (dim > members.size())
        throw DimensionError("embedding dimension exceeds component size");
    if (members.size() == 1)
        return Eigen::MatrixXd::Ones(1, static_cast<Eigen::Index>(dim));

    LocalOperator op = build_local_operator(g, members);
    Eigen::MatrixXd emb = members.size() < 3000
                              ? dense_embedding(op, dim)
                              : lanczos_embedding(op, dim, seed);
    canonicalize_signs(emb);
    return emb;
}

Eigen::VectorXd sym_laplacian_eigenvalues(const KnowledgeGraph& g) {
    std::size_t n = g.num_entities();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (const Triplet& t : g.triplets()) {
        a(t.head, t.tail) += 1.0;
        a(t.tail, t.head) += 1.0;
    }
    Eigen::VectorXd deg = a.rowwise().sum();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (deg[i] <= 0.0) continue;  // isolated vertex: zero row, eigenvalue 0
        lap(i, i) = 1.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0 && deg[j] > 0.0)
                lap(i, j) -= a(i, j) / std::sqrt(deg[i] * deg[j]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    return solver.eigenvalues();
}

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k,
                    std::uint64_t seed) {
    const std::size_t n = static_cast<std::size_t>(points.rows());
    if (k == 0 || n == 0) return {};
    if (k > n) throw DimensionError("kmeans: more clusters than points");

    const Eigen::VectorXd sq = points.rowwise().squaredNorm();

    auto run_once = [&](std::uint64_t restart_seed, KMeansResult& best,
                        bool& have_best, std::size_t restart_idx,
                        std::size_t& best_restart) {
        Rng rng(restart_seed);
        Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), points.cols());

        // k-means++ seeding.
        std::vector<double> d2(n, 0.0);
        std::size_t first = static_cast<std::size_t>(rng.below(n));
        centroids.row(0) = points.row(static_cast<Eigen::Index>(first));
        for (std::size_t c = 1; c < k; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double dmin = std::numeric_limits<double>::infinity();
                for (std::size_t cc = 0; cc < c; ++cc) {
                    double d = (points.row(static_cast<Eigen::Index>(i)) -
                                centroids.row(static_cast<Eigen::Index>(cc)))
                                   .squaredNorm();
                    dmin = std::min(dmin, d);
                }
                d2[i] = dmin;
                total += dmin;
            }
            std::size_t pick;
            if (total <= 0.0) {
                pick = static_cast<std::size_t>(rng.below(n));
            } else {
                double r = rng.real() * total;
                double acc = 0.0;
                pick = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (acc >= r) {
                        pick = i;
                        break;
                    }
                }
            }
            centroids.row(static_cast<Eigen::Index>(c)) =
                points.row(static_cast<Eigen::Index>(pick));
        }

        std::vector<int> assign(n, -1), prev(n, -2);
        Eigen::MatrixXd dist(static_cast<Eigen::Index>(n),
                             static_cast<Eigen::Index>(k));
        for (int iter = 0; iter < 100; ++iter) {
            // dist(i,c) = |x_i|^2 - 2 x_i . m_c + |m_c|^2
            dist.noalias() = -2.0 * points * centroids.transpose();
            dist.colwise() += sq;
            dist.rowwise() += centroids.rowwise().squaredNorm().transpose();
            for (std::size_t i = 0; i < n; ++i) {
                int arg = 0;
                double bestd = dist(static_cast<Eigen::Index>(i), 0);
                for (std::size_t c = 1; c < k; ++c) {
                    double d = dist(static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(c));
                    if (d < bestd) {
                        bestd = d;
                        arg = static_cast<int>(c);
                    }
                }
                assign[i] = arg;
            }
            if (assign == prev) break;
            prev = assign;

            centroids.setZero();
            std::vector<std::size_t> count(k, 0);
            std::vector<std::size_t> empty;
            for (std::size_t i = 0; i < n; ++i) {
                centroids.row(assign[i]) += points.row(static_cast<Eigen::Index>(i));
                ++count[static_cast<std::size_t>(assign[i])];
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (count[c] > 0)
                    centroids.row(static_cast<Eigen::Index>(c)) /=
                        static_cast<double>(count[c]);
                else
                    empty.push_back(c);
            }
            // Empty clusters re-seed, in index order, from the point
            // farthest from its own centroid; each point is claimed once.
            std::vector<std::size_t> reseeded;
            for (std::size_t c : empty) {
                std::size_t far = n;
                double fmax = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (std::find(reseeded.begin(), reseeded.end(), i) !=
                        reseeded.end())
                        continue;
                    double d = (points.row(static_cast<Eigen::Index>(i)) -
                                centroids.row(assign[i]))
                                   .squaredNorm();
                    if (d > fmax) {
                        fmax = d;
                        far = i;
                    }
                }
                if (far == n) far = 0;
                centroids.row(static_cast<Eigen::Index>(c)) =
                    points.row(static_cast<Eigen::Index>(far));
                reseeded.push_back(far);
            }
        }

        // Final guarantee: no cluster may end empty when n >= k.
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i)
            ++count[static_cast<std::size_t>(assign[i])];
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            std::size_t far = n;
            double fmax = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[static_cast<std::size_t>(assign[i])] <= 1) continue;
                double d = (points.row(static_cast<Eigen::Index>(i)) -
                            centroids.row(assign[i]))
                               .squaredNorm();
                if (d > fmax) {
                    fmax = d;
                    far = i;
                }
            }
            if (far == n) continue;
            --count[static_cast<std::size_t>(assign[far])];
            assign[far] = static_cast<int>(c);
            ++count[c];
            centroids.row(static_cast<Eigen::Index>(c)) =
                points.row(static_cast<Eigen::Index>(far));
        }

        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            wcss += (points.row(static_cast<Eigen::Index>(i)) -
                     centroids.row(assign[i]))
                        .squaredNorm();

        if (!have_best || wcss < best.wcss) {
            best.assignment = assign;
            best.centroids = centroids;
            best.wcss = wcss;
            have_best = true;
            best_restart = restart_idx;
        }
    };

    KMeansResult best;
    bool have_best = false;
    std::size_t best_restart = 0;
    for (std::size_t r = 0; r < 10; ++r)
        run_once(derive_seed(seed, r), best, have_best, r, best_restart);
    return best;
}

std::vector<std::size_t> apportion_roots(const std::vector<std::size_t>& sizes,
                                         std::size_t k) {
    std::size_t c_count = sizes.size();
    std::vector<std::size_t> alloc(c_count, 0);
    if (c_count == 0 || k == 0) return alloc;
    std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    if (total == 0) return alloc;

    std::size_t pool = k;
    if (k >= c_count) {
        for (auto& a : alloc) a = 1;
        pool = k - c_count;
    }

    // Largest-remainder apportionment of the remaining pool by size.
    std::vector<double> rem(c_count, 0.0);
    std::size_t given = 0;
    for (std::size_t c = 0; c < c_count; ++c) {
        double quota = static_cast<double>(pool) *
                       static_cast<double>(sizes[c]) / static_cast<double>(total);
        std::size_t base = static_cast<std::size_t>(quota);
        alloc[c] += base;
        given += base;
        rem[c] = quota - static_cast<double>(base);
    }
    std::vector<std::size_t> order(c_count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rem[a] > rem[b];
    });
    for (std::size_t i = 0; given < pool && i < order.size(); ++i, ++given)
        ++alloc[order[i]];

    // Cap at component size and hand overflow to whoever still has room.
    std::size_t overflow = 0;
    for (std::size_t c = 0; c < c_count; ++c) {
        if (alloc[c] > sizes[c]) {
            overflow += alloc[c] - sizes[c];
            alloc[c] = sizes[c];
        }
    }
    while (overflow > 0) {
        std::size_t best = c_count;
        std::size_t cap = 0;
        for (std::size_t c = 0; c < c_count; ++c) {
            std::size_t room = sizes[c] - alloc[c];
            if (room > cap) {
                cap = room;
                best = c;
            }
        }
        if (best == c_count) break;  // every component saturated: k > |V|
        ++alloc[best];
        --overflow;
    }
    return alloc;
}

std::vector<EntityId> spectral_roots(const KnowledgeGraph& g, std::size_t k,
                                     std::uint64_t seed) {
    Components comps = connected_components(g);
    std::vector<std::size_t> sizes(comps.members.size());
    for (std::size_t c = 0; c < comps.members.size(); ++c)
        sizes[c] = comps.members[c].size();
    std::vector<std::size_t> alloc = apportion_roots(sizes, k);

    std::vector<EntityId> roots;
    roots.reserve(k);
    for (std::size_t c = 0; c < comps.members.size(); ++c) {
        std::size_t a = alloc[c];
        if (a == 0) continue;
        const std::vector<EntityId>& members = comps.members[c];
        if (members.size() == 1) {
            roots.push_back(members[0]);
            continue;
        }
        std::uint64_t comp_seed = derive_seed(seed, 0x726f6f7473ULL + c);
        Eigen::MatrixXd emb = spectral_embedding(g, members, a, comp_seed);
        KMeansResult km = kmeans(emb, a, derive_seed(comp_seed, 1));
        for (std::size_t cl = 0; cl < a; ++cl) {
            EntityId pick = kNoEntity;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < members.size(); ++i) {
                if (km.assignment[i] != static_cast<int>(cl)) continue;
                double d = (emb.row(static_cast<Eigen::Index>(i)) -
                            km.centroids.row(static_cast<Eigen::Index>(cl)))
                               .squaredNorm();
                if (d < best) {  // members ascend, so ties keep the lowest id
                    best = d;
                    pick = members[i];
                }
            }
            if (pick != kNoEntity) roots.push_back(pick);
        }
    }
    return roots;
}

}  // namespace cyclekit
