#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "trajseq/cluster.hpp"
#include "trajseq/sequences.hpp"
#include "trajseq/state.hpp"

namespace trajseq {

/// Expected number of years to first reach NC from each violent state.
/// h[NC] is 0. A state gets +infinity when NC is not reached with
/// probability one from it, i.e. some state reachable from it (itself
/// included) has no path to NC. Violent states never observed as a source
/// have no path anywhere, so they count as not reaching NC.
struct HittingTimes {
    StateVector<double> h{};

    double operator[](State s) const noexcept { return h[index(s)]; }
};

/// Pooled transitions of the sequences labelled `cluster`.
/// Throws trajseq::Error if the cluster is empty.
TransitionMatrix cluster_transition_matrix(const SequenceSet& seqs, const ClusterAssignment& assign, int cluster);

/// Solves h_i = 1 + sum_{j violent} p(j|i) h_j over the states that reach
/// NC almost surely. Throws trajseq::Error with the offending system if it
/// is numerically singular.
HittingTimes hitting_times(const TransitionMatrix& tm);

/// Weighted mean of hitting times. `start` must put all its mass on violent
/// states and sum to 1. Returns +infinity if any weighted state never stops.
double mvst(const HittingTimes& ht, const StateVector<double>& start);
double mvst(const TransitionMatrix& tm, const StateVector<double>& start);

/// Which symbols define the starting distribution of violence.
enum class StartRule {
    first_violent,  ///< first violent symbol of each sequence
    initial_state,  ///< symbol at t = 0, when violent
    spell_starts,   ///< every violent symbol preceded by NC or at t = 0
};

/// Normalised frequencies of starting states over the cluster's sequences.
/// Throws trajseq::Error when the cluster has no violent spell.
StateVector<double> start_distribution(const SequenceSet& seqs, const ClusterAssignment& assign, int cluster,
                                       StartRule rule = StartRule::first_violent);

/// A reported transition (or tied set of transitions) and its rate.
struct TransitionStat {
    std::vector<std::pair<State, State>> pairs;
    double value = 0.0;

    /// "CH>CH", "NC>CH/CL", "DH/DL>CH".
    std::string label() const;
};

struct TrajectorySummary {
    int cluster = 0;  ///< 0 for the all-cells row
    std::size_t n_cells = 0;
    std::optional<TransitionStat> start;        ///< NC>X, share of all NC-source transitions
    std::optional<TransitionStat> repetition;   ///< X>X, X violent, p(X|X)
    std::optional<TransitionStat> cross;        ///< X>Y, both violent, X != Y, p(Y|X)
    std::optional<TransitionStat> terminus;     ///< X>NC, p(NC|X)
    std::optional<StateVector<double>> start_weights;
    HittingTimes hitting;
    double mvst_years = 0.0;  ///< +infinity when no finite stopping time exists
    TransitionMatrix transitions;
};

TrajectorySummary trajectory_summary(const SequenceSet& seqs, const ClusterAssignment& assign, int cluster,
                                     StartRule rule = StartRule::first_violent);

/// Same statistics pooled over every sequence.
TrajectorySummary all_cells_summary(const SequenceSet& seqs, StartRule rule = StartRule::first_violent);

/// Table of summaries; each column's definition is written as metadata.
void write_summary_csv(std::ostream& out, const std::vector<TrajectorySummary>& rows,
                       const std::vector<std::string>& comments = {});

}  // namespace trajseq
