#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trajseq/grid.hpp"
#include "trajseq/om.hpp"

namespace trajseq {

/// One agglomeration step. Leaves are nodes 0..n-1; merge m creates node
/// n + m. `a < b`.
struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;
};

struct Dendrogram {
    std::size_t n_leaves = 0;
    std::vector<Merge> merges;
};

/// Ward agglomeration on a condensed dissimilarity vector.
///
/// Dissimilarities are squared and updated with the Lance-Williams Ward
/// recurrence, so each merge minimises the increase in within-cluster
/// squared distance. Heights are reported on the input scale (square root of
/// the merge cost), the same convention as hclust "ward.D2" and SciPy.
///
/// Ties between equal merge costs go to the pair with the lexicographically
/// smallest (min leaf index, max leaf index), comparing each cluster by its
/// smallest leaf.
Dendrogram ward_linkage(std::span<const double> condensed, std::size_t n);
Dendrogram ward_linkage(const DistanceMatrix& d);

/// Flat labels in 1..k for each leaf after undoing the k-1 last merges.
/// Label 1 is the largest cluster; equal sizes are ordered by smallest leaf.
std::vector<int> cut_labels(const Dendrogram& dg, std::size_t k);

struct ClusterAssignment {
    std::vector<CellId> cells;  ///< leaf order, matches the sequence set
    std::vector<int> labels;    ///< 1..k
    int k = 0;
    /// Label reserved for never-violent cells dropped before clustering.
    std::optional<int> never_violent_label;

    std::vector<std::size_t> sizes() const;  ///< index 0 is label 1
};

ClusterAssignment cut(const Dendrogram& dg, std::size_t k, std::vector<CellId> cells);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Newick tree with branch lengths (parent height - child height).
void write_newick(std::ostream& out, const Dendrogram& dg, const std::vector<std::string>& leaf_names);

/// step,node_a,node_b,height,size
void write_merge_table_csv(std::ostream& out, const Dendrogram& dg, const std::vector<std::string>& comments = {});
Dendrogram read_merge_table_csv(std::istream& in, std::size_t n_leaves);

/// cell_col,cell_row,cluster
void write_assignment_csv(std::ostream& out, const ClusterAssignment& a, const std::vector<std::string>& comments = {});
ClusterAssignment read_assignment_csv(std::istream& in);

void write_assignment_geojson(std::ostream& out, const ClusterAssignment& a, const GridSpec& grid,
                              const std::vector<std::string>& metadata = {});

}  // namespace trajseq
