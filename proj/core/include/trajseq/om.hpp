#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trajseq/grid.hpp"
#include "trajseq/sequences.hpp"
#include "trajseq/state.hpp"

namespace trajseq {

struct OmOptions {
    /// Divide each distance by the longer sequence length.
    bool normalize = false;
};

/// Optimal Matching distance: minimum total cost of insertions, deletions
/// and substitutions turning `a` into `b`. Full O(|a||b|) table, no band.
double om_distance(std::span<const State> a, std::span<const State> b, const CostMatrix& costs,
                   const OmOptions& options = {});

/// Condensed upper-triangular distance matrix: entry (i, j), i < j, lives
/// at index n*i - i*(i+1)/2 + (j - i - 1).
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    DistanceMatrix(std::size_t n, std::vector<CellId> labels);

    static std::size_t condensed_size(std::size_t n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }
    static std::size_t condensed_index(std::size_t i, std::size_t j, std::size_t n) noexcept {
        return n * i - i * (i + 1) / 2 + (j - i - 1);
    }

    std::size_t size() const noexcept { return n_; }
    double at(std::size_t i, std::size_t j) const noexcept {
        if (i == j) return 0.0;
        if (i > j) std::swap(i, j);
        return d_[condensed_index(i, j, n_)];
    }
    void set(std::size_t i, std::size_t j, double v) noexcept {
        if (i > j) std::swap(i, j);
        d_[condensed_index(i, j, n_)] = v;
    }

    std::span<const double> condensed() const noexcept { return d_; }
    std::span<double> condensed() noexcept { return d_; }
    const std::vector<CellId>& labels() const noexcept { return labels_; }

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
    std::vector<CellId> labels_;
};

/// All n(n-1)/2 OM distances. Work is split over `workers` threads (0 = all
/// hardware threads); each pair is computed independently, so the result is
/// bit-identical for any worker count.
DistanceMatrix pairwise_distances(const SequenceSet& seqs, const CostMatrix& costs, unsigned workers = 0,
                                  const OmOptions& options = {});

/// Binary layout, all little-endian:
///   8 bytes  magic "TRJDIST1"
///   u64      n
///   n x (i32 col, i32 row) labels
///   n(n-1)/2 x f64 distances in condensed order
void write_distance_matrix(std::ostream& out, const DistanceMatrix& d);
DistanceMatrix read_distance_matrix(std::istream& in);

/// Square CSV with a cell label header; intended for small n.
void write_distance_matrix_csv(std::ostream& out, const DistanceMatrix& d, const std::vector<std::string>& comments = {});

}  // namespace trajseq
