#pragma once

// Exact null moments of join counts by enumerating every distinct
// arrangement of a fixed multiset of labels over the nodes.

#include <algorithm>
#include <map>
#include <vector>

#include "trajseq/spatial.hpp"

namespace oracle {

struct ExactMoments {
    std::map<std::pair<int, int>, double> mean, var;
    double mean_total = 0.0, var_total = 0.0;
    std::size_t arrangements = 0;
};

/// Joins between types r <= s for one labelling, counting each undirected
/// edge once.
inline std::map<std::pair<int, int>, double> count_joins(const std::vector<int>& labels,
                                                         const trajseq::SpatialWeights& w) {
    std::map<std::pair<int, int>, double> j;
    for (std::size_t i = 0; i < w.n; ++i) {
        for (std::size_t k : w.neighbors[i]) {
            if (k <= i) continue;
            j[{std::min(labels[i], labels[k]), std::max(labels[i], labels[k])}] += 1.0;
        }
    }
    return j;
}

inline ExactMoments enumerate_moments(std::vector<int> labels, const trajseq::SpatialWeights& w) {
    std::sort(labels.begin(), labels.end());
    std::vector<int> types = labels;
    types.erase(std::unique(types.begin(), types.end()), types.end());
    ExactMoments m;
    std::map<std::pair<int, int>, double> s1, s2;
    double t1 = 0.0, t2 = 0.0;
    do {
        auto j = count_joins(labels, w);
        double tot = 0.0;
        for (std::size_t a = 0; a < types.size(); ++a) {
            for (std::size_t b = a; b < types.size(); ++b) {
                const std::pair key{types[a], types[b]};
                const double v = j.count(key) ? j[key] : 0.0;
                s1[key] += v;
                s2[key] += v * v;
                if (a != b) tot += v;
            }
        }
        t1 += tot;
        t2 += tot * tot;
        ++m.arrangements;
    } while (std::next_permutation(labels.begin(), labels.end()));
    const double n = static_cast<double>(m.arrangements);
    for (const auto& [key, v] : s1) {
        m.mean[key] = v / n;
        m.var[key] = s2[key] / n - (v / n) * (v / n);
    }
    m.mean_total = t1 / n;
    m.var_total = t2 / n - m.mean_total * m.mean_total;
    return m;
}

}  // namespace oracle
