#include <gtest/gtest.h>

#include <sstream>

#include "oracles/om_bruteforce.hpp"
#include "trajseq/om.hpp"
#include "trajseq/random.hpp"

using namespace trajseq;

namespace {

using S = State;
using Seq = std::vector<State>;

const Seq r1a{S::CH, S::CH, S::CL, S::CH}, r1b{S::CH, S::CH, S::CL, S::CL};
const Seq r2a{S::CH, S::CL, S::DH, S::CL}, r2b{S::CL, S::CH, S::DL, S::CL};
const Seq r3a{S::CH, S::CH, S::CH, S::CL, S::CL}, r3b{S::CL, S::CL, S::CH, S::CH, S::CH};

Seq random_seq(SplitMix64& rng, std::size_t len) {
    Seq s(len);
    for (auto& x : s) x = state_from_index(rng.below(kNumStates));
    return s;
}

CostMatrix random_costs(SplitMix64& rng) {
    CostMatrix c;
    for (std::size_t i = 0; i < kNumStates; ++i)
        for (std::size_t j = i + 1; j < kNumStates; ++j) c.sub[i][j] = c.sub[j][i] = rng.uniform(0.0, 2.0);
    c.indel = rng.uniform(0.05, 2.0);
    return c;
}

SequenceSet as_set(const std::vector<Seq>& seqs) {
    SequenceSet set;
    set.length = seqs.empty() ? 0 : seqs[0].size();
    for (std::size_t i = 0; i < seqs.size(); ++i) set.sequences.push_back({{static_cast<int>(i), 0}, seqs[i]});
    return set;
}

}  // namespace

TEST(OmDistance, WorkedTableRows) {
    const auto all1 = CostMatrix::uniform(1, 1), sub5 = CostMatrix::uniform(5, 1), indel5 = CostMatrix::uniform(1, 5);
    EXPECT_EQ(om_distance(r1a, r1b, all1), 1.0);
    EXPECT_EQ(om_distance(r1a, r1b, sub5), 2.0);
    EXPECT_EQ(om_distance(r1a, r1b, indel5), 1.0);
    EXPECT_EQ(om_distance(r2a, r2b, all1), 3.0);
    EXPECT_EQ(om_distance(r2a, r2b, sub5), 4.0);
    // Three unit substitutions cost 3.
    EXPECT_EQ(om_distance(r2a, r2b, indel5), 3.0);
    EXPECT_EQ(oracle::om_bruteforce(r2a, r2b, indel5), 3.0);
    EXPECT_EQ(om_distance(r3a, r3b, all1), 4.0);
    EXPECT_EQ(om_distance(r3a, r3b, sub5), 4.0);
    EXPECT_EQ(om_distance(r3a, r3b, indel5), 4.0);
}

TEST(OmDistance, EmptyAndIdentity) {
    const auto c = CostMatrix::uniform(1.0, 0.75);
    EXPECT_EQ(om_distance(Seq{}, r3a, c), 5 * 0.75);
    EXPECT_EQ(om_distance(r3a, Seq{}, c), 5 * 0.75);
    EXPECT_EQ(om_distance(r3a, r3a, c), 0.0);
    OmOptions norm;
    norm.normalize = true;
    EXPECT_DOUBLE_EQ(om_distance(r1a, r1b, CostMatrix::uniform(1, 1), norm), 0.25);
}

TEST(OmDistance, MatchesBruteForceOnRandomPairs) {
    SplitMix64 rng(2024);
    for (int m = 0; m < 5; ++m) {
        const auto c = random_costs(rng);
        for (int rep = 0; rep < 200; ++rep) {
            const auto a = random_seq(rng, rng.below(6));
            const auto b = random_seq(rng, rng.below(6));
            const double d = om_distance(a, b, c);
            EXPECT_NEAR(d, oracle::om_bruteforce(a, b, c), 1e-9);
            EXPECT_EQ(d, om_distance(b, a, c));
            EXPECT_LE(d, c.indel * static_cast<double>(a.size() + b.size()) + 1e-12);
        }
    }
}

TEST(OmDistance, MotifShiftVersusTiming) {
    // One motif in an otherwise conflict-free 1997-2024 sequence.
    auto with_motif = [](std::size_t start, Seq motif) {
        Seq s(28, S::NC);
        std::copy(motif.begin(), motif.end(), s.begin() + static_cast<std::ptrdiff_t>(start));
        return s;
    };
    const Seq spread{S::CH, S::DH, S::DL, S::DL}, other{S::CH, S::DH, S::CL, S::CL};
    const auto early = with_motif(11, spread), late = with_motif(15, spread), same_time = with_motif(11, other);

    // High indel: the same-time pair is closer.
    const auto high = CostMatrix::uniform(1.0, 5.0);
    EXPECT_LT(om_distance(early, same_time, high), om_distance(early, late, high));
    EXPECT_EQ(om_distance(early, late, high), 8.0);  // eight substitutions

    // Low indel: the shifted motif is aligned by four deletions and four
    // insertions instead of substitutions, and the gap to the same-time
    // pair narrows.
    const auto low = CostMatrix::uniform(2.0, 0.25);
    EXPECT_EQ(om_distance(early, late, low), 8 * 0.25);
    EXPECT_LT(om_distance(early, late, low) / om_distance(early, same_time, low),
              om_distance(early, late, high) / om_distance(early, same_time, high));
}

TEST(PairwiseDistances, FourSequenceSet) {
    const auto d = pairwise_distances(as_set({r1a, r1b, r2a, r2b}), CostMatrix::uniform(1, 1), 2);
    ASSERT_EQ(d.size(), 4u);
    ASSERT_EQ(d.condensed().size(), 6u);
    EXPECT_EQ(d.at(0, 1), 1.0);
    EXPECT_EQ(d.at(2, 3), 3.0);
    EXPECT_EQ(d.at(3, 2), 3.0);
    EXPECT_EQ(d.condensed()[DistanceMatrix::condensed_index(2, 3, 4)], 3.0);
}

TEST(PairwiseDistances, BatchedKernelMatchesScalarForAnyWorkerCount) {
    SplitMix64 rng(5);
    const auto costs = random_costs(rng);
    std::vector<Seq> seqs;
    for (int i = 0; i < 75; ++i) seqs.push_back(random_seq(rng, 28));
    const auto set = as_set(seqs);
    const auto d1 = pairwise_distances(set, costs, 1);
    const auto d3 = pairwise_distances(set, costs, 3);
    EXPECT_EQ(d1, d3);
    for (std::size_t i = 0; i < seqs.size(); ++i)
        for (std::size_t j = i + 1; j < seqs.size(); ++j) ASSERT_EQ(d1.at(i, j), om_distance(seqs[i], seqs[j], costs));
}

TEST(PairwiseDistances, RaggedLengthsUseScalarPath) {
    SplitMix64 rng(6);
    const auto costs = random_costs(rng);
    SequenceSet set;
    for (int i = 0; i < 20; ++i) set.sequences.push_back({{i, 0}, random_seq(rng, 1 + rng.below(9))});
    const auto d = pairwise_distances(set, costs, 2);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = i + 1; j < 20; ++j)
            EXPECT_EQ(d.at(i, j), om_distance(set.sequences[i].symbols, set.sequences[j].symbols, costs));
}

TEST(DistanceMatrixIo, BinaryRoundTripAndCorruption) {
    SplitMix64 rng(8);
    std::vector<Seq> seqs;
    for (int i = 0; i < 9; ++i) seqs.push_back(random_seq(rng, 6));
    const auto d = pairwise_distances(as_set(seqs), random_costs(rng), 1);
    std::ostringstream out(std::ios::binary);
    write_distance_matrix(out, d);
    const std::string bytes = out.str();
    EXPECT_EQ(bytes.substr(0, 8), "TRJDIST1");
    EXPECT_EQ(bytes.size(), 8 + 8 + 9 * 8 + 36 * 8u);
    std::istringstream in(bytes, std::ios::binary);
    EXPECT_EQ(read_distance_matrix(in), d);

    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in_bad(bad, std::ios::binary);
    EXPECT_THROW(read_distance_matrix(in_bad), Error);
    std::istringstream in_short(bytes.substr(0, bytes.size() - 3), std::ios::binary);
    EXPECT_THROW(read_distance_matrix(in_short), Error);
}
