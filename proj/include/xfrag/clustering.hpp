#pragma once

// Lloyd k-means over predicate usage vectors (the QP matrix columns), with
// deterministic farthest-first seeding, a fixed restart schedule, and
// empty-cluster repair. exhaustive_optimum enumerates all partitions of at
// most k blocks and is the ground truth the iterative path is tested against.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "xfrag/workload.hpp"

namespace xfrag {

struct PredicateVector {
    std::string predicate_id;
    std::vector<double> coords;  // one entry per workload query, 0/1
    bool operator==(const PredicateVector&) const = default;
};

struct Clustering {
    std::size_t k = 0;
    std::vector<std::vector<std::string>> clusters;  // predicate ids, members sorted
    std::vector<std::vector<double>> centroids;      // aligned with clusters
    double objective = 0.0;                          // total intra-cluster variance
    std::vector<double> objective_trace;             // per iteration, best restart
};

inline std::vector<PredicateVector> qp_columns(const QpMatrix& qp) {
    std::vector<PredicateVector> out;
    for (std::size_t j = 0; j < qp.predicates.size(); ++j) {
        PredicateVector v;
        v.predicate_id = qp.predicates[j];
        v.coords.reserve(qp.queries.size());
        for (std::size_t i = 0; i < qp.queries.size(); ++i)
            v.coords.push_back(static_cast<double>(qp.cells[i][j]));
        out.push_back(std::move(v));
    }
    return out;
}

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double partition_objective(const std::vector<PredicateVector>& points,
                                  const std::vector<std::vector<int>>& blocks) {
    double total = 0.0;
    if (points.empty()) return total;
    const std::size_t dim = points[0].coords.size();
    std::vector<double> mean(dim);
    for (const auto& block : blocks) {
        if (block.empty()) continue;
        std::fill(mean.begin(), mean.end(), 0.0);
        for (int idx : block)
            for (std::size_t c = 0; c < dim; ++c) mean[c] += points[idx].coords[c];
        for (std::size_t c = 0; c < dim; ++c) mean[c] /= static_cast<double>(block.size());
        for (int idx : block) total += sq_dist(points[idx].coords, mean);
    }
    return total;
}

struct LloydRun {
    std::vector<int> assignment;
    std::vector<std::vector<double>> centroids;
    double objective = 0.0;
    std::vector<double> trace;
};

/// One Lloyd descent from the given centroids. Assignment ties go to the
/// lowest centroid index; an emptied cluster is reseeded with the member of
/// the largest cluster farthest from that cluster's centroid.
inline LloydRun lloyd(const std::vector<PredicateVector>& points,
                      std::vector<std::vector<double>> centroids, std::size_t max_iters = 100) {
    const std::size_t n = points.size();
    const std::size_t k = centroids.size();
    LloydRun run;
    run.assignment.assign(n, -1);
    std::vector<int> prev(n, -1);

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // assign
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points[i].coords, centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double d = sq_dist(points[i].coords, centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            run.assignment[i] = best;
        }
        // repair empties
        bool repaired = false;
        while (true) {
            std::vector<std::size_t> count(k, 0);
            for (int a : run.assignment) ++count[a];
            std::size_t empty = k;
            for (std::size_t c = 0; c < k; ++c)
                if (count[c] == 0) {
                    empty = c;
                    break;
                }
            if (empty == k) break;
            std::size_t largest = 0;
            for (std::size_t c = 1; c < k; ++c)
                if (count[c] > count[largest]) largest = c;
            int moved = -1;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (run.assignment[i] != static_cast<int>(largest)) continue;
                double d = sq_dist(points[i].coords, centroids[largest]);
                if (d > far_d) {
                    far_d = d;
                    moved = static_cast<int>(i);
                }
            }
            run.assignment[moved] = static_cast<int>(empty);
            centroids[empty] = points[moved].coords;
            repaired = true;
        }
        // update
        const std::size_t dim = points.empty() ? 0 : points[0].coords.size();
        for (std::size_t c = 0; c < k; ++c) std::fill(centroids[c].begin(), centroids[c].end(), 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++count[run.assignment[i]];
            for (std::size_t d = 0; d < dim; ++d)
                centroids[run.assignment[i]][d] += points[i].coords[d];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (count[c] > 0)
                for (std::size_t d = 0; d < dim; ++d)
                    centroids[c][d] /= static_cast<double>(count[c]);
        // objective
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            obj += sq_dist(points[i].coords, centroids[run.assignment[i]]);
        run.trace.push_back(obj);
        run.objective = obj;
        if (!repaired && run.assignment == prev) break;
        prev = run.assignment;
    }
    run.centroids = std::move(centroids);
    return run;
}

/// Farthest-first seeds starting from the given point; min-distance ties go
/// to the lowest index.
inline std::vector<std::vector<double>> farthest_first(const std::vector<PredicateVector>& points,
                                                       std::size_t k, std::size_t start) {
    const std::size_t n = points.size();
    std::vector<bool> chosen(n, false);
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    std::vector<std::vector<double>> seeds;
    std::size_t cur = start;
    for (std::size_t c = 0; c < k; ++c) {
        chosen[cur] = true;
        seeds.push_back(points[cur].coords);
        for (std::size_t i = 0; i < n; ++i)
            min_d[i] = std::min(min_d[i], sq_dist(points[i].coords, points[cur].coords));
        if (c + 1 == k) break;
        std::size_t next = n;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) continue;
            if (min_d[i] > best) {
                best = min_d[i];
                next = i;
            }
        }
        cur = next;
    }
    return seeds;
}

}  // namespace detail

/// Deterministic for fixed (vectors, k, seed): vectors are canonicalized to
/// predicate-id order, restart r starts farthest-first seeding from a
/// seed-rotated spread of points, and the lowest-objective restart wins with
/// ties to the earliest.
inline Clustering kmeans(std::vector<PredicateVector> vectors, std::size_t k, std::uint64_t seed,
                         std::size_t restarts = 10) {
    if (k == 0) throw ParamError("k must be >= 1");
    if (vectors.empty()) throw ParamError("kmeans needs at least one vector");
    if (k > vectors.size())
        throw ParamError("k = " + std::to_string(k) + " exceeds the number of vectors (" +
                         std::to_string(vectors.size()) + ")");
    for (const auto& v : vectors)
        if (v.coords.size() != vectors[0].coords.size())
            throw ParamError("vectors must share one length");
    std::sort(vectors.begin(), vectors.end(), [](const auto& a, const auto& b) {
        return natural_less(a.predicate_id, b.predicate_id);
    });

    const std::size_t n = vectors.size();
    detail::LloydRun best;
    bool have_best = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        std::size_t start = (seed % n + (r * n) / restarts) % n;
        detail::LloydRun run = detail::lloyd(vectors, detail::farthest_first(vectors, k, start));
        if (!have_best || run.objective < best.objective) {
            best = std::move(run);
            have_best = true;
        }
    }

    Clustering out;
    out.k = k;
    out.objective = best.objective;
    out.objective_trace = best.trace;
    std::vector<std::vector<std::string>> groups(k);
    for (std::size_t i = 0; i < n; ++i)
        groups[best.assignment[i]].push_back(vectors[i].predicate_id);
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < k; ++c)
        if (!groups[c].empty()) order.push_back(c);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return natural_less(groups[a].front(), groups[b].front());
    });
    for (std::size_t c : order) {
        out.clusters.push_back(groups[c]);
        out.centroids.push_back(best.centroids[c]);
    }
    return out;
}

/// Repeats assignment/update from the given centroids; used to check that a
/// converged clustering is a fixed point.
inline Clustering kmeans_refine(std::vector<PredicateVector> vectors,
                                const std::vector<std::vector<double>>& centroids) {
    std::sort(vectors.begin(), vectors.end(), [](const auto& a, const auto& b) {
        return natural_less(a.predicate_id, b.predicate_id);
    });
    detail::LloydRun run = detail::lloyd(vectors, centroids);
    Clustering out;
    out.k = centroids.size();
    out.objective = run.objective;
    out.objective_trace = run.trace;
    std::vector<std::vector<std::string>> groups(centroids.size());
    for (std::size_t i = 0; i < vectors.size(); ++i)
        groups[run.assignment[i]].push_back(vectors[i].predicate_id);
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < groups.size(); ++c)
        if (!groups[c].empty()) order.push_back(c);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return natural_less(groups[a].front(), groups[b].front());
    });
    for (std::size_t c : order) {
        out.clusters.push_back(groups[c]);
        out.centroids.push_back(run.centroids[c]);
    }
    return out;
}

namespace detail {

inline bool partition_less(const std::vector<std::vector<std::string>>& a,
                           const std::vector<std::vector<std::string>>& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        const auto& ca = a[i];
        const auto& cb = b[i];
        for (std::size_t j = 0; j < std::min(ca.size(), cb.size()); ++j) {
            if (ca[j] != cb[j]) return natural_less(ca[j], cb[j]);
        }
        if (ca.size() != cb.size()) return ca.size() < cb.size();
    }
    return a.size() < b.size();
}

inline std::vector<std::vector<std::string>> canonical_blocks(
    const std::vector<PredicateVector>& points, const std::vector<std::vector<int>>& blocks) {
    std::vector<std::vector<std::string>> named;
    for (const auto& block : blocks) {
        std::vector<std::string> ids;
        for (int idx : block) ids.push_back(points[idx].predicate_id);
        std::sort(ids.begin(), ids.end(),
                  [](const auto& a, const auto& b) { return natural_less(a, b); });
        named.push_back(std::move(ids));
    }
    std::sort(named.begin(), named.end(),
              [](const auto& a, const auto& b) { return natural_less(a.front(), b.front()); });
    return named;
}

}  // namespace detail

/// Enumerates every partition of the vectors into at most k nonempty blocks
/// and returns one of minimum objective; ties break toward the
/// lexicographically least partition (sorted members, sorted blocks).
/// Guarded to 12 vectors.
inline Clustering exhaustive_optimum(std::vector<PredicateVector> vectors, std::size_t k) {
    if (vectors.size() > 12)
        throw ParamError("exhaustive_optimum is limited to 12 vectors, got " +
                         std::to_string(vectors.size()));
    if (k == 0) throw ParamError("k must be >= 1");
    if (vectors.empty()) throw ParamError("exhaustive_optimum needs at least one vector");
    if (k > vectors.size())
        throw ParamError("k = " + std::to_string(k) + " exceeds the number of vectors (" +
                         std::to_string(vectors.size()) + ")");
    std::sort(vectors.begin(), vectors.end(), [](const auto& a, const auto& b) {
        return natural_less(a.predicate_id, b.predicate_id);
    });

    const std::size_t n = vectors.size();
    std::vector<std::vector<int>> blocks;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<std::vector<std::string>> best_named;
    std::vector<std::vector<int>> best_blocks;

    auto consider = [&]() {
        double obj = detail::partition_objective(vectors, blocks);
        if (obj < best_obj - 1e-12) {
            best_obj = obj;
            best_blocks = blocks;
            best_named = detail::canonical_blocks(vectors, blocks);
            return;
        }
        if (obj <= best_obj + 1e-12) {
            auto named = detail::canonical_blocks(vectors, blocks);
            if (detail::partition_less(named, best_named)) {
                best_obj = std::min(best_obj, obj);
                best_blocks = blocks;
                best_named = std::move(named);
            }
        }
    };

    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == n) {
            consider();
            return;
        }
        for (auto& block : blocks) {
            block.push_back(static_cast<int>(i));
            self(self, i + 1);
            block.pop_back();
        }
        if (blocks.size() < k) {
            blocks.push_back({static_cast<int>(i)});
            self(self, i + 1);
            blocks.pop_back();
        }
    };
    rec(rec, 0);

    Clustering out;
    out.k = best_named.size();
    out.clusters = best_named;
    out.objective = best_obj;
    const std::size_t dim = vectors[0].coords.size();
    for (const auto& cluster : out.clusters) {
        std::vector<double> mean(dim, 0.0);
        for (const auto& id : cluster) {
            for (std::size_t i = 0; i < n; ++i)
                if (vectors[i].predicate_id == id)
                    for (std::size_t d = 0; d < dim; ++d) mean[d] += vectors[i].coords[d];
        }
        for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(cluster.size());
        out.centroids.push_back(std::move(mean));
    }
    return out;
}

}  // namespace xfrag
