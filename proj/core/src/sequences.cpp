#include "trajseq/sequences.hpp"

#include <algorithm>
#include <cmath>

#include "trajseq/csv.hpp"

namespace trajseq {

std::string StateSequence::to_string() const {
    std::string out;
    out.reserve(symbols.size() * 3);
    for (std::size_t t = 0; t < symbols.size(); ++t) {
        if (t) out.push_back('-');
        out += trajseq::to_string(symbols[t]);
    }
    return out;
}

std::vector<State> parse_symbols(std::string_view text) {
    std::vector<State> out;
    text = trim(text);
    while (!text.empty()) {
        const auto dash = text.find('-');
        const auto token = trim(text.substr(0, dash));
        const auto s = parse_state(token);
        if (!s) throw Error("unknown state symbol '" + std::string(token) + "'");
        out.push_back(*s);
        if (dash == std::string_view::npos) break;
        text.remove_prefix(dash + 1);
    }
    return out;
}

SequenceSet extract_sequences(const StateField& field, bool drop_never_violent) {
    SequenceSet set;
    set.length = field.n_years();
    set.year_min = field.span().min;
    set.includes_all_nc = !drop_never_violent;
    const auto& grid = field.grid();
    for (std::size_t lin = 0; lin < grid.n_cells(); ++lin) {
        const CellId cell = grid.cell_at(lin);
        const auto states = field.cell_states(cell);
        if (drop_never_violent && std::none_of(states.begin(), states.end(), is_violent)) continue;
        set.sequences.push_back({cell, {states.begin(), states.end()}});
    }
    return set;
}

TransitionMatrix TransitionMatrix::from_counts(const StateMatrix<std::uint64_t>& counts) {
    TransitionMatrix tm;
    tm.counts = counts;
    for (std::size_t i = 0; i < kNumStates; ++i) {
        std::uint64_t total = 0;
        for (auto c : counts[i]) total += c;
        for (std::size_t j = 0; j < kNumStates; ++j) {
            tm.probs[i][j] = total ? static_cast<double>(counts[i][j]) / static_cast<double>(total) : 0.0;
        }
    }
    return tm;
}

std::uint64_t TransitionMatrix::row_total(State from) const noexcept {
    std::uint64_t total = 0;
    for (auto c : counts[index(from)]) total += c;
    return total;
}

void accumulate_transitions(std::span<const State> symbols, StateMatrix<std::uint64_t>& counts) noexcept {
    for (std::size_t t = 1; t < symbols.size(); ++t) ++counts[index(symbols[t - 1])][index(symbols[t])];
}

TransitionMatrix empirical_transition_matrix(const SequenceSet& seqs) {
    if (seqs.length < 2) throw Error("empirical_transition_matrix: sequences need at least two time steps");
    StateMatrix<std::uint64_t> counts{};
    for (const auto& s : seqs.sequences) accumulate_transitions(s.symbols, counts);
    return TransitionMatrix::from_counts(counts);
}

CostMatrix CostMatrix::uniform(double sub, double indel) {
    CostMatrix c;
    for (std::size_t i = 0; i < kNumStates; ++i)
        for (std::size_t j = 0; j < kNumStates; ++j) c.sub[i][j] = i == j ? 0.0 : sub;
    c.indel = indel;
    return c;
}

double CostMatrix::max_substitution() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < kNumStates; ++i)
        for (std::size_t j = 0; j < kNumStates; ++j)
            if (i != j) m = std::max(m, sub[i][j]);
    return m;
}

void CostMatrix::validate() const {
    if (!(indel > 0.0) || !std::isfinite(indel)) throw Error("cost matrix: indel cost must be positive");
    for (std::size_t i = 0; i < kNumStates; ++i) {
        if (sub[i][i] != 0.0) throw Error("cost matrix: diagonal must be zero");
        for (std::size_t j = 0; j < kNumStates; ++j) {
            if (sub[i][j] != sub[j][i]) throw Error("cost matrix: substitution costs must be symmetric");
            if (i != j && !(sub[i][j] >= 0.0 && sub[i][j] <= 2.0)) {
                throw Error("cost matrix: substitution costs must lie in [0, 2]");
            }
        }
    }
}

CostMatrix substitution_costs(const TransitionMatrix& tm, double indel) {
    CostMatrix c;
    for (std::size_t i = 0; i < kNumStates; ++i) {
        for (std::size_t j = i + 1; j < kNumStates; ++j) {
            const double v = 2.0 - tm.probs[i][j] - tm.probs[j][i];
            c.sub[i][j] = v;
            c.sub[j][i] = v;
        }
    }
    c.indel = indel;
    c.validate();
    return c;
}

CostMatrix substitution_costs_relative(const TransitionMatrix& tm, double indel_fraction) {
    if (!(indel_fraction > 0.0)) throw Error("indel fraction must be positive");
    CostMatrix c = substitution_costs(tm, 1.0);
    c.indel = indel_fraction * c.max_substitution();
    if (!(c.indel > 0.0)) throw Error("relative indel cost is zero: every substitution is free");
    return c;
}

void write_sequences_csv(std::ostream& out, const SequenceSet& seqs, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.comment("year_min=" + std::to_string(seqs.year_min));
    w.comment("length=" + std::to_string(seqs.length));
    w.comment(std::string("includes_all_nc=") + (seqs.includes_all_nc ? "true" : "false"));
    w.row({"cell_col", "cell_row", "sequence"});
    for (const auto& s : seqs.sequences) {
        w.field(s.cell.col).field(s.cell.row).field(std::string_view(s.to_string()));
        w.end_row();
    }
}

namespace {

std::optional<std::string_view> metadata_value(const std::vector<std::string>& comments, std::string_view key) {
    for (const auto& c : comments) {
        std::string_view line = trim(c);
        if (line.starts_with(key) && line.size() > key.size() && line[key.size()] == '=') {
            return trim(line.substr(key.size() + 1));
        }
    }
    return std::nullopt;
}

}  // namespace

SequenceSet read_sequences_csv(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw Error("sequences file has no header row");
    const CsvHeader header(fields);
    const std::size_t c_col = header.require("cell_col"), c_row = header.require("cell_row"),
                      c_seq = header.require("sequence");
    SequenceSet set;
    const auto& meta = reader.comments();
    auto year_min = metadata_value(meta, "year_min");
    auto length = metadata_value(meta, "length");
    auto all_nc = metadata_value(meta, "includes_all_nc");
    if (!year_min || !length || !parse_int(*year_min) || !parse_int(*length)) {
        throw Error("sequences file lacks year_min/length metadata");
    }
    set.year_min = static_cast<int>(*parse_int(*year_min));
    set.length = static_cast<std::size_t>(*parse_int(*length));
    set.includes_all_nc = !all_nc || *all_nc != "false";
    while (reader.next(fields)) {
        const auto where = " (sequences record " + std::to_string(reader.record_number()) + ")";
        if (fields.size() < header.names().size()) throw Error("short row" + where);
        auto col = parse_int(fields[c_col]);
        auto row = parse_int(fields[c_row]);
        if (!col || !row) throw Error("invalid cell id" + where);
        StateSequence s{{static_cast<std::int32_t>(*col), static_cast<std::int32_t>(*row)}, parse_symbols(fields[c_seq])};
        if (s.symbols.size() != set.length) throw Error("sequence length differs from metadata" + where);
        set.sequences.push_back(std::move(s));
    }
    return set;
}

namespace {

template <typename T>
void write_matrix(std::ostream& out, const StateMatrix<T>& m, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.field("from");
    for (State s : kAllStates) w.field(to_string(s));
    w.end_row();
    for (State from : kAllStates) {
        w.field(to_string(from));
        for (State to : kAllStates) {
            if constexpr (std::is_floating_point_v<T>) {
                w.field(m[index(from)][index(to)]);
            } else {
                w.field(static_cast<long long>(m[index(from)][index(to)]));
            }
        }
        w.end_row();
    }
}

}  // namespace

void write_state_matrix_csv(std::ostream& out, const StateMatrix<double>& m, const std::vector<std::string>& comments) {
    write_matrix(out, m, comments);
}

void write_state_matrix_csv(std::ostream& out, const StateMatrix<std::uint64_t>& m,
                            const std::vector<std::string>& comments) {
    write_matrix(out, m, comments);
}

StateMatrix<double> read_state_matrix_csv(std::istream& in, std::vector<std::string>* comments) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw Error("matrix file has no header row");
    const CsvHeader header(fields);
    StateVector<std::size_t> col_of{};
    for (State s : kAllStates) col_of[index(s)] = header.require(to_string(s));
    StateMatrix<double> m{};
    std::array<bool, kNumStates> seen{};
    while (reader.next(fields)) {
        if (fields.empty()) continue;
        const auto from = parse_state(fields[0]);
        if (!from) throw Error("matrix row label '" + fields[0] + "' is not a state");
        for (State to : kAllStates) {
            const std::size_t c = col_of[index(to)];
            auto v = c < fields.size() ? parse_double(fields[c]) : std::nullopt;
            if (!v) throw Error("matrix entry is not numeric");
            m[index(*from)][index(to)] = *v;
        }
        seen[index(*from)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw Error("matrix file is missing rows");
    if (comments) *comments = reader.comments();
    return m;
}

void write_costs_csv(std::ostream& out, const CostMatrix& costs, const std::vector<std::string>& comments) {
    auto all = comments;
    all.push_back("indel=" + format_double(costs.indel));
    write_state_matrix_csv(out, costs.sub, all);
}

CostMatrix read_costs_csv(std::istream& in) {
    std::vector<std::string> comments;
    CostMatrix c;
    c.sub = read_state_matrix_csv(in, &comments);
    auto indel = metadata_value(comments, "indel");
    if (!indel || !parse_double(*indel)) throw Error("costs file lacks indel metadata");
    c.indel = *parse_double(*indel);
    c.validate();
    return c;
}

}  // namespace trajseq
