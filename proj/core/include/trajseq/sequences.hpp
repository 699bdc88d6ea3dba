#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trajseq/grid.hpp"
#include "trajseq/scdi.hpp"
#include "trajseq/state.hpp"

namespace trajseq {

struct StateSequence {
    CellId cell;
    std::vector<State> symbols;

    /// "NC-CL-CH-..."
    std::string to_string() const;
};

/// Parses the "NC-CL-CH" form. Throws trajseq::Error on unknown symbols.
std::vector<State> parse_symbols(std::string_view text);

struct SequenceSet {
    std::vector<StateSequence> sequences;
    std::size_t length = 0;          ///< T, shared by every sequence
    int year_min = 0;
    bool includes_all_nc = true;     ///< false when never-violent cells were dropped

    std::size_t size() const noexcept { return sequences.size(); }
    bool empty() const noexcept { return sequences.empty(); }
};

/// One sequence per grid cell in row-major order. With drop_never_violent,
/// all-NC cells are left out (they form the implied never-violent class).
SequenceSet extract_sequences(const StateField& field, bool drop_never_violent);

/// Pooled first-order transition counts and row-conditional probabilities.
/// probs[i][j] = Pr(s[t+1] = j | s[t] = i); rows without support are zero.
struct TransitionMatrix {
    StateMatrix<std::uint64_t> counts{};
    StateMatrix<double> probs{};

    static TransitionMatrix from_counts(const StateMatrix<std::uint64_t>& counts);

    std::uint64_t row_total(State from) const noexcept;
    bool supported(State from) const noexcept { return row_total(from) > 0; }
    double p(State from, State to) const noexcept { return probs[index(from)][index(to)]; }
    std::uint64_t count(State from, State to) const noexcept { return counts[index(from)][index(to)]; }
};

/// Adds the adjacent pairs of one sequence to `counts`.
void accumulate_transitions(std::span<const State> symbols, StateMatrix<std::uint64_t>& counts) noexcept;

/// Requires T >= 2.
TransitionMatrix empirical_transition_matrix(const SequenceSet& seqs);

struct CostMatrix {
    StateMatrix<double> sub{};
    double indel = 1.0;

    /// All substitutions cost `sub`, indels cost `indel`.
    static CostMatrix uniform(double sub, double indel);

    double max_substitution() const noexcept;

    /// Zero diagonal, symmetry, off-diagonal in [0, 2], indel > 0.
    void validate() const;
};

/// sub[i][j] = 2 - p(j|i) - p(i|j) off the diagonal, 0 on it.
CostMatrix substitution_costs(const TransitionMatrix& tm, double indel);

/// Same, with indel = indel_fraction * max off-diagonal substitution cost.
CostMatrix substitution_costs_relative(const TransitionMatrix& tm, double indel_fraction = 0.5);

void write_sequences_csv(std::ostream& out, const SequenceSet& seqs, const std::vector<std::string>& comments = {});
SequenceSet read_sequences_csv(std::istream& in);

/// Labeled 5x5 matrix with a "from" column and one column per state.
void write_state_matrix_csv(std::ostream& out, const StateMatrix<double>& m, const std::vector<std::string>& comments = {});
void write_state_matrix_csv(std::ostream& out, const StateMatrix<std::uint64_t>& m,
                            const std::vector<std::string>& comments = {});
StateMatrix<double> read_state_matrix_csv(std::istream& in, std::vector<std::string>* comments = nullptr);

/// Substitution matrix plus a "# indel=<v>" metadata line.
void write_costs_csv(std::ostream& out, const CostMatrix& costs, const std::vector<std::string>& comments = {});
CostMatrix read_costs_csv(std::istream& in);

}  // namespace trajseq
