#include <gtest/gtest.h>

#include <sstream>

#include "trajseq/random.hpp"
#include "trajseq/sequences.hpp"

using namespace trajseq;

namespace {

using S = State;

SequenceSet make_set(const std::vector<std::vector<State>>& rows) {
    SequenceSet set;
    set.length = rows.empty() ? 0 : rows[0].size();
    set.year_min = 2000;
    for (std::size_t i = 0; i < rows.size(); ++i) set.sequences.push_back({{static_cast<int>(i), 0}, rows[i]});
    return set;
}

TransitionMatrix random_tm(SplitMix64& rng) {
    StateMatrix<std::uint64_t> counts{};
    for (auto& row : counts)
        for (auto& c : row) c = rng.below(4) == 0 ? 0 : rng.below(50);
    return TransitionMatrix::from_counts(counts);
}

}  // namespace

TEST(Sequences, ExtractDropsNeverViolent) {
    GridSpec g;
    g.n_cols = 3;
    g.n_rows = 1;
    StateField f(g, {2000, 2002});
    f.set({1, 0}, 2001, S::CH);
    const auto kept = extract_sequences(f, true);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept.sequences[0].cell, (CellId{1, 0}));
    EXPECT_EQ(kept.sequences[0].to_string(), "NC-CH-NC");
    EXPECT_FALSE(kept.includes_all_nc);
    EXPECT_EQ(extract_sequences(f, false).size(), 3u);
}

TEST(Sequences, ParseSymbols) {
    EXPECT_EQ(parse_symbols("NC-cl-CH"), (std::vector<State>{S::NC, S::CL, S::CH}));
    EXPECT_THROW(parse_symbols("NC-XX"), Error);
}

TEST(TransitionMatrix, PooledCounts) {
    const auto set = make_set({{S::NC, S::CH, S::CH, S::NC}, {S::CH, S::CL, S::NC, S::NC}});
    const auto tm = empirical_transition_matrix(set);
    EXPECT_EQ(tm.count(S::CH, S::CH), 1u);
    EXPECT_EQ(tm.count(S::NC, S::NC), 1u);
    EXPECT_EQ(tm.row_total(S::CH), 3u);
    EXPECT_DOUBLE_EQ(tm.p(S::CH, S::NC), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(tm.p(S::NC, S::CH), 0.5);
    EXPECT_FALSE(tm.supported(S::DH));
    EXPECT_DOUBLE_EQ(tm.p(S::DH, S::DH), 0.0);
}

TEST(SubstitutionCosts, Formula) {
    const auto set = make_set({{S::NC, S::CH, S::CH, S::NC}, {S::CH, S::CL, S::NC, S::NC}});
    const auto tm = empirical_transition_matrix(set);
    const auto c = substitution_costs(tm, 0.7);
    EXPECT_DOUBLE_EQ(c.sub[index(S::NC)][index(S::CH)], 2.0 - 0.5 - 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.sub[index(S::CH)][index(S::CH)], 0.0);
    EXPECT_DOUBLE_EQ(c.sub[index(S::DL)][index(S::DH)], 2.0);
    EXPECT_DOUBLE_EQ(c.indel, 0.7);
    EXPECT_THROW(substitution_costs(tm, 0.0), Error);

    const auto rel = substitution_costs_relative(tm);
    EXPECT_DOUBLE_EQ(rel.indel, 0.5 * rel.max_substitution());
    EXPECT_DOUBLE_EQ(rel.max_substitution(), 2.0);
}

TEST(SubstitutionCosts, PropertiesOnRandomMatrices) {
    SplitMix64 rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        const auto tm = random_tm(rng);
        const auto c = substitution_costs(tm, 1.0);
        EXPECT_NO_THROW(c.validate());
        for (std::size_t i = 0; i < kNumStates; ++i) {
            EXPECT_EQ(c.sub[i][i], 0.0);
            for (std::size_t j = 0; j < kNumStates; ++j) {
                EXPECT_EQ(c.sub[i][j], c.sub[j][i]);
                EXPECT_GE(c.sub[i][j], 0.0);
                EXPECT_LE(c.sub[i][j], 2.0);
            }
        }
    }
}

TEST(CostMatrix, ValidateRejectsBadMatrices) {
    auto c = CostMatrix::uniform(1.0, 1.0);
    EXPECT_NO_THROW(c.validate());
    c.sub[0][1] = 0.5;
    EXPECT_THROW(c.validate(), Error);
    c = CostMatrix::uniform(1.0, 0.0);
    EXPECT_THROW(c.validate(), Error);
}

TEST(SequencesCsv, RoundTrips) {
    const auto set = make_set({{S::NC, S::DH, S::DL}, {S::CL, S::NC, S::NC}});
    std::ostringstream out;
    write_sequences_csv(out, set, {"seed=1"});
    std::istringstream in(out.str());
    const auto back = read_sequences_csv(in);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.length, 3u);
    EXPECT_EQ(back.year_min, 2000);
    EXPECT_EQ(back.sequences[1].symbols, set.sequences[1].symbols);
    EXPECT_EQ(back.sequences[1].cell, set.sequences[1].cell);

    SplitMix64 rng(3);
    const auto costs = substitution_costs_relative(random_tm(rng), 0.5);
    std::ostringstream cout_;
    write_costs_csv(cout_, costs);
    std::istringstream cin_(cout_.str());
    const auto costs_back = read_costs_csv(cin_);
    EXPECT_EQ(costs_back.sub, costs.sub);
    EXPECT_EQ(costs_back.indel, costs.indel);

    std::ostringstream mout;
    write_state_matrix_csv(mout, costs.sub);
    std::istringstream min(mout.str());
    EXPECT_EQ(read_state_matrix_csv(min), costs.sub);
}
