#include "trajseq/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "trajseq/csv.hpp"
#include "trajseq/parallel.hpp"
#include "trajseq/random.hpp"
#include "trajseq/state.hpp"

namespace trajseq {

SpatialWeights build_weights(std::span<const CellId> cells, Contiguity scheme) {
    if (cells.empty()) throw Error("build_weights: no cells");
    SpatialWeights w;
    w.n = cells.size();
    w.scheme = scheme;
    w.neighbors.resize(w.n);

    std::unordered_map<CellId, std::size_t, CellIdHash> where;
    where.reserve(cells.size() * 2);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!where.emplace(cells[i], i).second) throw Error("build_weights: duplicate cell");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                if (scheme == Contiguity::rook && dr != 0 && dc != 0) continue;
                auto it = where.find({cells[i].col + dc, cells[i].row + dr});
                if (it != where.end()) w.neighbors[i].push_back(it->second);
            }
        }
        std::sort(w.neighbors[i].begin(), w.neighbors[i].end());
    }
    for (const auto& nb : w.neighbors) {
        const auto d = static_cast<double>(nb.size());
        w.S0 += d;
        w.S2 += 4.0 * d * d;
    }
    w.S1 = 2.0 * w.S0;
    return w;
}

const JoinStat& JoinCountReport::pair(int r, int s) const {
    if (r > s) std::swap(r, s);
    for (const auto& p : pairs) {
        if (p.r == r && p.s == s) return p;
    }
    throw Error("join count report has no pair (" + std::to_string(r) + ", " + std::to_string(s) + ")");
}

namespace {

struct TypeIndex {
    std::vector<int> types;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> of;  // per node

    std::size_t m() const noexcept { return types.size(); }
    std::size_t pair_slot(std::size_t a, std::size_t b) const noexcept {
        if (a > b) std::swap(a, b);
        return a * m() - a * (a + 1) / 2 + b;  // row-major upper triangle with diagonal
    }
};

TypeIndex index_types(std::span<const int> labels, const SpatialWeights& w) {
    if (labels.size() != w.n) throw Error("join_counts: one label per weighted cell is required");
    TypeIndex t;
    t.types.assign(labels.begin(), labels.end());
    std::sort(t.types.begin(), t.types.end());
    t.types.erase(std::unique(t.types.begin(), t.types.end()), t.types.end());
    t.counts.assign(t.types.size(), 0);
    t.of.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        t.of[i] = static_cast<std::size_t>(std::lower_bound(t.types.begin(), t.types.end(), labels[i]) - t.types.begin());
        ++t.counts[t.of[i]];
    }
    return t;
}

/// Joins per (type, type) slot for the assignment `of`.
void count_joins(const SpatialWeights& w, const TypeIndex& t, std::span<const std::size_t> of, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < w.n; ++i) {
        for (std::size_t j : w.neighbors[i]) {
            if (j > i) out[t.pair_slot(of[i], of[j])] += 1.0;
        }
    }
}

double falling(double n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= n - i;
    return r;
}

std::optional<double> z_score(double observed, double expected, double variance) {
    const double scale = std::max(1.0, expected * expected);
    if (!(variance > 1e-12 * scale)) return std::nullopt;
    return (observed - expected) / std::sqrt(variance);
}

}  // namespace

JoinCountReport join_counts(std::span<const int> labels, const SpatialWeights& w) {
    const TypeIndex t = index_types(labels, w);
    const std::size_t m = t.m();
    std::vector<double> J(m * (m + 1) / 2);
    count_joins(w, t, t.of, J);

    JoinCountReport rep;
    rep.n = w.n;
    rep.S0 = w.S0;
    rep.S1 = w.S1;
    rep.S2 = w.S2;
    rep.types = t.types;
    rep.type_counts = t.counts;

    const double n = static_cast<double>(w.n);
    const double S0 = w.S0, S1 = w.S1, S2 = w.S2;
    const double n2 = falling(n, 2), n3 = falling(n, 3), n4 = falling(n, 4);
    // Ratios of falling factorials; zero whenever the numerator vanishes so
    // small n does not divide by zero.
    auto ratio = [](double num, double den) { return num == 0.0 ? 0.0 : num / den; };

    std::vector<double> E_same(m), V_same(m);
    for (std::size_t a = 0; a < m; ++a) {
        const double nr = static_cast<double>(t.counts[a]);
        const double p2 = ratio(falling(nr, 2), n2), p3 = ratio(falling(nr, 3), n3), p4 = ratio(falling(nr, 4), n4);
        E_same[a] = 0.5 * S0 * p2;
        V_same[a] = 0.25 * (S1 * p2 + (S2 - 2.0 * S1) * p3 + (S0 * S0 + S1 - S2) * p4) - E_same[a] * E_same[a];
    }

    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            JoinStat js;
            js.r = t.types[a];
            js.s = t.types[b];
            js.observed = J[t.pair_slot(a, b)];
            if (a == b) {
                js.expected = E_same[a];
                js.variance = V_same[a];
                // A type with fewer than two cells has no possible like join.
                js.z = t.counts[a] < 2 ? std::nullopt : z_score(js.observed, js.expected, js.variance);
            } else {
                const double nr = static_cast<double>(t.counts[a]), ns = static_cast<double>(t.counts[b]);
                js.expected = ratio(S0 * nr * ns, n2);
                js.variance = 0.25 * (2.0 * ratio(S1 * nr * ns, n2) + (S2 - 2.0 * S1) * ratio(nr * ns * (nr + ns - 2.0), n3) +
                                      4.0 * (S0 * S0 + S1 - S2) * ratio(falling(nr, 2) * falling(ns, 2), n4)) -
                              js.expected * js.expected;
                js.z = z_score(js.observed, js.expected, js.variance);
            }
            rep.pairs.push_back(js);
        }
    }

    // Unlike joins: J_tot = S0/2 - sum_r J_rr. Like-join counts of distinct
    // types covary through the four-distinct-cell term only.
    double like_obs = 0.0, like_mean = 0.0, like_var = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        like_obs += J[t.pair_slot(a, a)];
        like_mean += E_same[a];
        like_var += V_same[a];
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            const double na = static_cast<double>(t.counts[a]), nb = static_cast<double>(t.counts[b]);
            like_var += 0.25 * (S0 * S0 + S1 - S2) * ratio(falling(na, 2) * falling(nb, 2), n4) - E_same[a] * E_same[b];
        }
    }
    rep.total.r = rep.total.s = 0;
    rep.total.observed = 0.5 * S0 - like_obs;
    rep.total.expected = 0.5 * S0 - like_mean;
    rep.total.variance = like_var;
    rep.total.z = z_score(rep.total.observed, rep.total.expected, rep.total.variance);
    return rep;
}

PermutationReport permutation_reference(std::span<const int> labels, const SpatialWeights& w, std::size_t n_perms,
                                        std::uint64_t seed, unsigned workers) {
    if (n_perms < 99) throw Error("permutation_reference: at least 99 permutations are required");
    const TypeIndex t = index_types(labels, w);
    const std::size_t m = t.m();
    const std::size_t slots = m * (m + 1) / 2;
    const std::size_t width = slots + 1;  // + unlike total

    std::vector<double> observed(slots);
    count_joins(w, t, t.of, observed);
    double observed_total = 0.5 * w.S0;
    for (std::size_t a = 0; a < m; ++a) observed_total -= observed[t.pair_slot(a, a)];

    std::vector<double> draws(n_perms * width);
    constexpr std::size_t kChunk = 64;
    const std::size_t chunks = (n_perms + kChunk - 1) / kChunk;
    parallel_for(chunks, workers, [&](std::size_t chunk) {
        std::vector<std::size_t> of(t.of);
        std::vector<double> J(slots);
        const std::size_t end = std::min(n_perms, (chunk + 1) * kChunk);
        for (std::size_t r = chunk * kChunk; r < end; ++r) {
            std::copy(t.of.begin(), t.of.end(), of.begin());
            SplitMix64 rng(derive_seed(seed, "join-permutation", r));
            for (std::size_t i = of.size(); i > 1; --i) std::swap(of[i - 1], of[rng.below(i)]);
            count_joins(w, t, of, J);
            double like = 0.0;
            for (std::size_t a = 0; a < m; ++a) like += J[t.pair_slot(a, a)];
            std::copy(J.begin(), J.end(), draws.begin() + static_cast<std::ptrdiff_t>(r * width));
            draws[r * width + slots] = 0.5 * w.S0 - like;
        }
    });

    auto summarize = [&](std::size_t col, double obs) {
        PermutationStat ps;
        double mean = 0.0;
        for (std::size_t r = 0; r < n_perms; ++r) mean += draws[r * width + col];
        mean /= static_cast<double>(n_perms);
        double ss = 0.0;
        for (std::size_t r = 0; r < n_perms; ++r) {
            const double d = draws[r * width + col] - mean;
            ss += d * d;
        }
        ps.mean = mean;
        ps.variance = ss / static_cast<double>(n_perms - 1);
        const double dev = std::abs(obs - mean) - 1e-9;
        std::size_t extreme = 0;
        for (std::size_t r = 0; r < n_perms; ++r) extreme += std::abs(draws[r * width + col] - mean) >= dev ? 1 : 0;
        ps.pseudo_p = static_cast<double>(extreme + 1) / static_cast<double>(n_perms + 1);
        return ps;
    };

    PermutationReport rep;
    rep.n_perms = n_perms;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a; b < m; ++b) {
            auto ps = summarize(t.pair_slot(a, b), observed[t.pair_slot(a, b)]);
            ps.r = t.types[a];
            ps.s = t.types[b];
            rep.pairs.push_back(ps);
        }
    }
    rep.total = summarize(slots, observed_total);
    return rep;
}

void write_joins_long_csv(std::ostream& out, const JoinCountReport& report, const PermutationReport* perms,
                          const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.comment("n=" + std::to_string(report.n) + " S0=" + format_double(report.S0) + " S1=" + format_double(report.S1) +
              " S2=" + format_double(report.S2));
    std::vector<std::string> header{"r", "s", "J", "E", "Var", "z"};
    if (perms) {
        header.insert(header.end(), {"perm_mean", "perm_var", "pseudo_p"});
    }
    w.row(header);
    auto emit = [&](const JoinStat& js, const PermutationStat* ps, bool total) {
        if (total) {
            w.field("tot").field("tot");
        } else {
            w.field(js.r).field(js.s);
        }
        w.field(js.observed).field(js.expected).field(js.variance);
        if (js.z) {
            w.field(*js.z);
        } else {
            w.field("NA");
        }
        if (ps) w.field(ps->mean).field(ps->variance).field(ps->pseudo_p);
        w.end_row();
    };
    for (std::size_t i = 0; i < report.pairs.size(); ++i) emit(report.pairs[i], perms ? &perms->pairs[i] : nullptr, false);
    emit(report.total, perms ? &perms->total : nullptr, true);
}

void write_joins_matrix_csv(std::ostream& out, const JoinCountReport& report, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.field("type");
    for (int t : report.types) w.field(t);
    w.end_row();
    for (std::size_t a = 0; a < report.types.size(); ++a) {
        w.field(report.types[a]);
        for (std::size_t b = 0; b < report.types.size(); ++b) {
            if (b < a) {
                w.field("-");
                continue;
            }
            const auto& js = report.pair(report.types[a], report.types[b]);
            if (js.z) {
                w.field(*js.z);
            } else {
                w.field("NA");
            }
        }
        w.end_row();
    }
}

}  // namespace trajseq
