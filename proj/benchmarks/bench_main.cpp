#include <benchmark/benchmark.h>

#include "trajseq/cluster.hpp"
#include "trajseq/om.hpp"
#include "trajseq/random.hpp"
#include "trajseq/spatial.hpp"

using namespace trajseq;

namespace {

SequenceSet sticky_sequences(std::size_t n, std::size_t len, std::uint64_t seed) {
    SplitMix64 rng(seed);
    SequenceSet set;
    set.length = len;
    set.year_min = 1997;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<State> s(len);
        State cur = state_from_index(rng.below(kNumStates));
        for (auto& x : s) {
            if (rng.below(10) < 3) cur = state_from_index(rng.below(kNumStates));
            x = cur;
        }
        set.sequences.push_back({{static_cast<int>(i % 100), static_cast<int>(i / 100)}, s});
    }
    return set;
}

void BM_OmDistance(benchmark::State& st) {
    const auto len = static_cast<std::size_t>(st.range(0));
    const auto set = sticky_sequences(2, len, 1);
    const auto costs = substitution_costs_relative(empirical_transition_matrix(set));
    for (auto _ : st)
        benchmark::DoNotOptimize(om_distance(set.sequences[0].symbols, set.sequences[1].symbols, costs));
}
BENCHMARK(BM_OmDistance)->Arg(28)->Arg(100);

void BM_PairwiseDistances(benchmark::State& st) {
    const auto set = sticky_sequences(static_cast<std::size_t>(st.range(0)), 28, 2);
    const auto costs = substitution_costs_relative(empirical_transition_matrix(set));
    for (auto _ : st) benchmark::DoNotOptimize(pairwise_distances(set, costs, 1));
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(DistanceMatrix::condensed_size(set.size())));
}
BENCHMARK(BM_PairwiseDistances)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_WardLinkage(benchmark::State& st) {
    const auto n = static_cast<std::size_t>(st.range(0));
    SplitMix64 rng(3);
    std::vector<double> d(DistanceMatrix::condensed_size(n));
    for (auto& x : d) x = rng.uniform(0.0, 10.0);
    for (auto _ : st) benchmark::DoNotOptimize(ward_linkage(d, n));
}
BENCHMARK(BM_WardLinkage)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_JoinPermutations(benchmark::State& st) {
    std::vector<CellId> cells;
    for (int r = 0; r < 60; ++r)
        for (int c = 0; c < 60; ++c) cells.push_back({c, r});
    const auto w = build_weights(cells, Contiguity::queen);
    SplitMix64 rng(4);
    std::vector<int> labels(cells.size());
    for (auto& l : labels) l = 1 + static_cast<int>(rng.below(7));
    for (auto _ : st) benchmark::DoNotOptimize(permutation_reference(labels, w, 999, 5, 1));
}
BENCHMARK(BM_JoinPermutations)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
