#include <gtest/gtest.h>

#include <sstream>

#include "oracles/join_enumerate.hpp"
#include "trajseq/random.hpp"
#include "trajseq/spatial.hpp"

using namespace trajseq;

namespace {

std::vector<CellId> block(int cols, int rows) {
    std::vector<CellId> c;
    for (int r = 0; r < rows; ++r)
        for (int q = 0; q < cols; ++q) c.push_back({q, r});
    return c;
}

void expect_matches_enumeration(const std::vector<CellId>& cells, const std::vector<int>& labels, Contiguity scheme) {
    const auto w = build_weights(cells, scheme);
    const auto rep = join_counts(labels, w);
    const auto exact = oracle::enumerate_moments(labels, w);
    for (const auto& js : rep.pairs) {
        const std::pair key{js.r, js.s};
        EXPECT_NEAR(js.expected, exact.mean.at(key), 1e-9) << js.r << "," << js.s;
        EXPECT_NEAR(js.variance, exact.var.at(key), 1e-9) << js.r << "," << js.s;
    }
    EXPECT_NEAR(rep.total.expected, exact.mean_total, 1e-9);
    EXPECT_NEAR(rep.total.variance, exact.var_total, 1e-9);
}

}  // namespace

TEST(Weights, RookAndQueenNeighbours) {
    const auto cells = block(3, 3);
    const auto rook = build_weights(cells, Contiguity::rook);
    const auto queen = build_weights(cells, Contiguity::queen);
    EXPECT_EQ(rook.neighbors[4], (std::vector<std::size_t>{1, 3, 5, 7}));
    EXPECT_EQ(queen.neighbors[4].size(), 8u);
    EXPECT_EQ(queen.neighbors[0], (std::vector<std::size_t>{1, 3, 4}));
    EXPECT_EQ(rook.n_joins(), 12u);
    EXPECT_EQ(queen.n_joins(), 20u);
    EXPECT_DOUBLE_EQ(rook.S0, 24.0);
    EXPECT_DOUBLE_EQ(rook.S1, 48.0);
    // degrees 2,3,2,3,4,3,2,3,2 -> sum (2d)^2
    EXPECT_DOUBLE_EQ(rook.S2, 4 * 16.0 + 4 * 36.0 + 64.0);
}

TEST(Weights, IsolatedAndSparseCells) {
    const std::vector<CellId> cells{{0, 0}, {5, 5}, {1, 1}};
    const auto rook = build_weights(cells, Contiguity::rook);
    EXPECT_TRUE(rook.neighbors[1].empty());
    EXPECT_TRUE(rook.neighbors[0].empty());
    const auto queen = build_weights(cells, Contiguity::queen);
    EXPECT_EQ(queen.neighbors[0], (std::vector<std::size_t>{2}));
    EXPECT_TRUE(queen.neighbors[1].empty());
    EXPECT_THROW(build_weights(std::vector<CellId>{{0, 0}, {0, 0}}, Contiguity::rook), Error);
}

TEST(JoinCounts, TwoByTwoExhaustive) {
    const auto w = build_weights(block(2, 2), Contiguity::rook);
    const std::vector<int> labels{1, 1, 2, 2};
    const auto rep = join_counts(labels, w);
    EXPECT_NEAR(rep.pair(1, 1).expected, 2.0 / 3.0, 1e-12);
    const auto exact = oracle::enumerate_moments(labels, w);
    EXPECT_EQ(exact.arrangements, 6u);
    EXPECT_NEAR(exact.mean.at({1, 1}), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(rep.pair(1, 1).variance, exact.var.at({1, 1}), 1e-12);
    EXPECT_EQ(rep.pair(1, 1).observed, 1.0);  // cells 0-1 share an edge
    EXPECT_EQ(rep.pair(1, 2).observed, 2.0);
}

TEST(JoinCounts, MomentsMatchFullEnumeration) {
    expect_matches_enumeration(block(3, 3), {1, 1, 1, 2, 2, 2, 3, 3, 3}, Contiguity::rook);
    expect_matches_enumeration(block(3, 3), {1, 1, 1, 2, 2, 2, 3, 3, 3}, Contiguity::queen);
    expect_matches_enumeration(block(3, 3), {1, 1, 1, 1, 2, 2, 2, 2, 2}, Contiguity::queen);
    expect_matches_enumeration(block(4, 2), {1, 2, 2, 3, 3, 3, 4, 4}, Contiguity::rook);
    // Irregular support with an isolated cell and a singleton type.
    const std::vector<CellId> odd{{0, 0}, {1, 0}, {2, 0}, {1, 1}, {1, 2}, {4, 4}, {0, 1}, {2, 2}};
    expect_matches_enumeration(odd, {1, 1, 2, 2, 2, 3, 3, 4}, Contiguity::queen);
}

TEST(JoinCounts, AccountingIdentityAndUndefinedZ) {
    SplitMix64 rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const auto cells = block(1 + static_cast<int>(rng.below(8)), 1 + static_cast<int>(rng.below(8)));
        std::vector<int> labels(cells.size());
        for (auto& l : labels) l = 1 + static_cast<int>(rng.below(4));
        const auto w = build_weights(cells, rng.below(2) ? Contiguity::rook : Contiguity::queen);
        const auto r = join_counts(labels, w);
        double sum = 0.0, like = 0.0;
        for (const auto& js : r.pairs) {
            sum += js.observed;
            if (js.r == js.s) like += js.observed;
        }
        EXPECT_DOUBLE_EQ(sum, w.S0 / 2.0);
        EXPECT_DOUBLE_EQ(r.total.observed, w.S0 / 2.0 - like);
    }
    // A singleton type has no same-type joins and no z.
    const auto w = build_weights(block(3, 1), Contiguity::rook);
    const auto r = join_counts(std::vector<int>{1, 2, 2}, w);
    EXPECT_FALSE(r.pair(1, 1).z);
    EXPECT_TRUE(r.pair(1, 2).z || r.pair(1, 2).variance == 0.0);
}

TEST(Permutation, DeterministicAcrossWorkerCounts) {
    const auto cells = block(8, 8);
    SplitMix64 rng(42);
    std::vector<int> labels(cells.size());
    for (auto& l : labels) l = 1 + static_cast<int>(rng.below(3));
    const auto w = build_weights(cells, Contiguity::queen);
    const auto a = permutation_reference(labels, w, 499, 7, 1);
    const auto b = permutation_reference(labels, w, 499, 7, 4);
    ASSERT_EQ(a.pairs.size(), b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        EXPECT_EQ(a.pairs[i].mean, b.pairs[i].mean);
        EXPECT_EQ(a.pairs[i].variance, b.pairs[i].variance);
        EXPECT_EQ(a.pairs[i].pseudo_p, b.pairs[i].pseudo_p);
    }
    EXPECT_EQ(a.total.mean, b.total.mean);
    EXPECT_THROW(permutation_reference(labels, w, 10, 7), Error);
}

TEST(Permutation, MomentsNearAnalytic) {
    const auto cells = block(12, 12);
    SplitMix64 rng(43);
    std::vector<int> labels(cells.size());
    for (auto& l : labels) l = 1 + static_cast<int>(rng.below(3));
    const auto w = build_weights(cells, Contiguity::rook);
    const auto an = join_counts(labels, w);
    const auto pr = permutation_reference(labels, w, 4000, 9);
    for (std::size_t i = 0; i < an.pairs.size(); ++i) {
        const double se = std::sqrt(an.pairs[i].variance / 4000.0);
        EXPECT_LT(std::abs(pr.pairs[i].mean - an.pairs[i].expected), 4.0 * se);
        EXPECT_NEAR(pr.pairs[i].variance / an.pairs[i].variance, 1.0, 0.15);
    }
}

TEST(JoinsCsv, LayoutAndClusteredMap) {
    // Left half type 1, right half type 2: strong same-type clustering.
    const auto cells = block(10, 10);
    std::vector<int> labels;
    for (const auto& c : cells) labels.push_back(c.col < 5 ? 1 : 2);
    const auto w = build_weights(cells, Contiguity::queen);
    const auto r = join_counts(labels, w);
    EXPECT_GT(*r.pair(1, 1).z, 2.0);
    EXPECT_GT(*r.pair(2, 2).z, 2.0);
    EXPECT_LT(*r.pair(1, 2).z, -2.0);

    std::ostringstream m;
    write_joins_matrix_csv(m, r);
    EXPECT_NE(m.str().find("type,1,2"), std::string::npos);
    EXPECT_NE(m.str().find("2,-,"), std::string::npos);
    const auto perms = permutation_reference(labels, w, 99, 1);
    std::ostringstream l;
    write_joins_long_csv(l, r, &perms);
    EXPECT_NE(l.str().find("tot"), std::string::npos);
    EXPECT_NE(l.str().find("pseudo_p"), std::string::npos);
}
