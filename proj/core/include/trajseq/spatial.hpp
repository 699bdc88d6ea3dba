#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trajseq/grid.hpp"

namespace trajseq {

enum class Contiguity { rook, queen };

/// Binary symmetric contiguity weights over a set of grid cells.
struct SpatialWeights {
    std::size_t n = 0;
    Contiguity scheme = Contiguity::queen;
    std::vector<std::vector<std::size_t>> neighbors;  ///< sorted, no self-loops
    double S0 = 0.0;  ///< sum_ij w_ij
    double S1 = 0.0;  ///< 1/2 sum_ij (w_ij + w_ji)^2
    double S2 = 0.0;  ///< sum_i (w_i. + w_.i)^2

    std::size_t n_joins() const noexcept { return static_cast<std::size_t>(S0 / 2); }
};

/// Rook: edge neighbours. Queen: edge or corner neighbours. Only cells in
/// `cells` become nodes, in input order. Duplicate cells are an error.
SpatialWeights build_weights(std::span<const CellId> cells, Contiguity scheme);

struct JoinStat {
    int r = 0;  ///< type label, r <= s
    int s = 0;
    double observed = 0.0;
    double expected = 0.0;
    double variance = 0.0;
    std::optional<double> z;  ///< undefined when the variance degenerates
};

/// Multitype join counts under non-free sampling (labels permuted with the
/// observed type counts held fixed), moments after Cliff & Ord (1981).
struct JoinCountReport {
    std::size_t n = 0;
    double S0 = 0.0, S1 = 0.0, S2 = 0.0;
    std::vector<int> types;                ///< sorted distinct labels
    std::vector<std::size_t> type_counts;  ///< parallel to `types`
    std::vector<JoinStat> pairs;           ///< (r, s) with r <= s, row-major over `types`
    JoinStat total;                        ///< unlike joins: J_tot = 1/2 sum_ij w_ij [type_i != type_j]

    const JoinStat& pair(int r, int s) const;
};

JoinCountReport join_counts(std::span<const int> labels, const SpatialWeights& w);

struct PermutationStat {
    int r = 0;
    int s = 0;
    double mean = 0.0;
    double variance = 0.0;  ///< sample variance over replicates
    double pseudo_p = 1.0;  ///< two-sided, folded about the permutation mean
};

struct PermutationReport {
    std::size_t n_perms = 0;
    std::vector<PermutationStat> pairs;  ///< same order as JoinCountReport::pairs
    PermutationStat total;
};

/// Conditional permutation reference distribution. Replicate r shuffles the
/// labels with its own stream derive_seed(seed, "join-permutation", r), so
/// results are identical for any worker count. Requires n_perms >= 99.
PermutationReport permutation_reference(std::span<const int> labels, const SpatialWeights& w, std::size_t n_perms,
                                        std::uint64_t seed, unsigned workers = 0);

/// Long format: r,s,J,E,Var,z,pseudo_p (+ a "tot" row for unlike joins).
void write_joins_long_csv(std::ostream& out, const JoinCountReport& report, const PermutationReport* perms,
                          const std::vector<std::string>& comments = {});

/// Upper-triangular z-score matrix; "-" below the diagonal, "NA" when z is
/// undefined.
void write_joins_matrix_csv(std::ostream& out, const JoinCountReport& report,
                            const std::vector<std::string>& comments = {});

}  // namespace trajseq
