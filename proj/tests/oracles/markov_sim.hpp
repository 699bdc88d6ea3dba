#pragma once

// Monte Carlo absorption times: walk the chain from `start` until NC.

#include <cmath>

#include "trajseq/random.hpp"
#include "trajseq/sequences.hpp"

namespace oracle {

struct SimResult {
    double mean = 0.0;
    double se = 0.0;
    bool truncated = false;  ///< some walk hit the step cap
};

inline SimResult simulate_absorption(const trajseq::StateMatrix<double>& p, trajseq::State start, std::size_t walks,
                                     std::uint64_t seed, std::size_t max_steps = 1'000'000) {
    using namespace trajseq;
    SplitMix64 rng(seed);
    double sum = 0.0, sum2 = 0.0;
    SimResult r;
    for (std::size_t w = 0; w < walks; ++w) {
        State s = start;
        std::size_t steps = 0;
        while (s != State::NC && steps < max_steps) {
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t next = kNumStates - 1;
            for (std::size_t j = 0; j < kNumStates; ++j) {
                acc += p[index(s)][j];
                if (u < acc) {
                    next = j;
                    break;
                }
            }
            s = state_from_index(next);
            ++steps;
        }
        if (steps == max_steps) r.truncated = true;
        const double x = static_cast<double>(steps);
        sum += x;
        sum2 += x * x;
    }
    const double n = static_cast<double>(walks);
    r.mean = sum / n;
    r.se = std::sqrt(std::max(0.0, (sum2 / n - r.mean * r.mean) * n / (n - 1)) / n);
    return r;
}

}  // namespace oracle
