#pragma once

// Textbook Ward clustering, O(n^3). Instead of the Lance-Williams update it
// keeps, for every pair of clusters, the plain sum of squared input
// distances between their members and evaluates the Ward merge cost from
// the centroid identity
//
//   d2(A, B) = 2|A||B|/(|A|+|B|) * ( S_AB/(|A||B|) - S_AA/(2|A|^2) - S_BB/(2|B|^2) )
//
// where S_XY sums D_xy^2 over x in X, y in Y (S_XX over ordered pairs).
// Costs within `tie_tol` (relative) count as ties, resolved by the
// lexicographically smallest (min leaf, max leaf).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "trajseq/cluster.hpp"
#include "trajseq/om.hpp"

namespace oracle {

inline trajseq::Dendrogram ward_naive(const std::vector<double>& condensed, std::size_t n, double tie_tol = 1e-12) {
    using trajseq::DistanceMatrix;
    struct Cluster {
        std::size_t node, min_leaf, size;
        bool active;
    };
    std::vector<Cluster> cl;
    for (std::size_t i = 0; i < n; ++i) cl.push_back({i, i, 1, true});
    // S over cluster slots; merged clusters get fresh slots.
    const std::size_t slots = 2 * n - 1;
    std::vector<double> S(slots * slots, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = condensed[DistanceMatrix::condensed_index(std::min(i, j), std::max(i, j), n)];
            S[i * slots + j] = d * d;
        }
    }
    trajseq::Dendrogram dg;
    dg.n_leaves = n;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0, bb = 0;
        std::pair<std::size_t, std::size_t> best_key{n, n};
        for (std::size_t x = 0; x < cl.size(); ++x) {
            if (!cl[x].active) continue;
            for (std::size_t y = x + 1; y < cl.size(); ++y) {
                if (!cl[y].active) continue;
                const double na = static_cast<double>(cl[x].size), nb = static_cast<double>(cl[y].size);
                const double cost = 2.0 * na * nb / (na + nb) *
                                    (S[x * slots + y] / (na * nb) - S[x * slots + x] / (2 * na * na) -
                                     S[y * slots + y] / (2 * nb * nb));
                const std::pair key{std::min(cl[x].min_leaf, cl[y].min_leaf), std::max(cl[x].min_leaf, cl[y].min_leaf)};
                const double tol = tie_tol * std::max(1.0, std::abs(best));
                if (cost < best - tol || (std::abs(cost - best) <= tol && key < best_key)) {
                    best = cost;
                    best_key = key;
                    ba = x;
                    bb = y;
                }
            }
        }
        const std::size_t z = cl.size();
        cl.push_back({n + step, std::min(cl[ba].min_leaf, cl[bb].min_leaf), cl[ba].size + cl[bb].size, true});
        for (std::size_t w = 0; w < z; ++w) {
            S[z * slots + w] = S[w * slots + z] = S[ba * slots + w] + S[bb * slots + w];
        }
        S[z * slots + z] = S[ba * slots + ba] + S[bb * slots + bb] + 2 * S[ba * slots + bb];
        cl[ba].active = cl[bb].active = false;
        dg.merges.push_back({std::min(cl[ba].node, cl[bb].node), std::max(cl[ba].node, cl[bb].node),
                             std::sqrt(std::max(best, 0.0)), cl[z].size});
    }
    return dg;
}

}  // namespace oracle
