#include "trajseq/chains.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "trajseq/csv.hpp"

namespace trajseq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_assignment(const SequenceSet& seqs, const ClusterAssignment& assign) {
    if (assign.labels.size() != seqs.size()) throw Error("cluster assignment does not match the sequence set");
}

StateVector<double> start_weights_of(const SequenceSet& seqs, const std::vector<bool>& member, StartRule rule,
                                     bool& any) {
    StateVector<double> w{};
    double total = 0.0;
    for (std::size_t n = 0; n < seqs.size(); ++n) {
        if (!member[n]) continue;
        const auto& sym = seqs.sequences[n].symbols;
        switch (rule) {
            case StartRule::first_violent:
                for (State s : sym) {
                    if (is_violent(s)) {
                        w[index(s)] += 1;
                        total += 1;
                        break;
                    }
                }
                break;
            case StartRule::initial_state:
                if (!sym.empty() && is_violent(sym.front())) {
                    w[index(sym.front())] += 1;
                    total += 1;
                }
                break;
            case StartRule::spell_starts:
                for (std::size_t t = 0; t < sym.size(); ++t) {
                    if (is_violent(sym[t]) && (t == 0 || sym[t - 1] == State::NC)) {
                        w[index(sym[t])] += 1;
                        total += 1;
                    }
                }
                break;
        }
    }
    any = total > 0;
    if (any) {
        for (auto& v : w) v /= total;
    }
    return w;
}

// Exact comparison of count ratios a/b vs c/d without rounding.
__extension__ typedef unsigned __int128 wide_uint;

int compare_ratio(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    const auto lhs = static_cast<wide_uint>(a) * d;
    const auto rhs = static_cast<wide_uint>(c) * b;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

struct Candidate {
    State from, to;
    std::uint64_t num, den;
};

std::optional<TransitionStat> argmax(const std::vector<Candidate>& cands) {
    std::optional<TransitionStat> best;
    const Candidate* top = nullptr;
    for (const auto& c : cands) {
        if (c.num == 0 || c.den == 0) continue;
        if (!top || compare_ratio(c.num, c.den, top->num, top->den) > 0) {
            top = &c;
            best = TransitionStat{{{c.from, c.to}}, static_cast<double>(c.num) / static_cast<double>(c.den)};
        } else if (compare_ratio(c.num, c.den, top->num, top->den) == 0) {
            best->pairs.emplace_back(c.from, c.to);
        }
    }
    return best;
}

TrajectorySummary summarize_members(const SequenceSet& seqs, const std::vector<bool>& member, int cluster,
                                    StartRule rule) {
    TrajectorySummary s;
    s.cluster = cluster;
    StateMatrix<std::uint64_t> counts{};
    for (std::size_t n = 0; n < seqs.size(); ++n) {
        if (!member[n]) continue;
        ++s.n_cells;
        accumulate_transitions(seqs.sequences[n].symbols, counts);
    }
    if (s.n_cells == 0) throw Error("cluster " + std::to_string(cluster) + " has no sequences");
    s.transitions = TransitionMatrix::from_counts(counts);
    const auto& tm = s.transitions;

    const std::uint64_t nc_total = tm.row_total(State::NC);
    std::vector<Candidate> starts, reps, crosses, ends;
    for (State x : kViolentStates) {
        const std::uint64_t row = tm.row_total(x);
        starts.push_back({State::NC, x, tm.count(State::NC, x), nc_total});
        reps.push_back({x, x, tm.count(x, x), row});
        ends.push_back({x, State::NC, tm.count(x, State::NC), row});
        for (State y : kViolentStates) {
            if (y != x) crosses.push_back({x, y, tm.count(x, y), row});
        }
    }
    s.start = argmax(starts);
    s.repetition = argmax(reps);
    s.cross = argmax(crosses);
    s.terminus = argmax(ends);

    s.hitting = hitting_times(tm);
    bool any = false;
    const auto w = start_weights_of(seqs, member, rule, any);
    if (any) {
        s.start_weights = w;
        s.mvst_years = mvst(s.hitting, w);
    } else {
        s.mvst_years = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

std::vector<bool> members_of(const SequenceSet& seqs, const ClusterAssignment& assign, int cluster) {
    check_assignment(seqs, assign);
    std::vector<bool> m(seqs.size());
    for (std::size_t n = 0; n < seqs.size(); ++n) m[n] = assign.labels[n] == cluster;
    return m;
}

}  // namespace

TransitionMatrix cluster_transition_matrix(const SequenceSet& seqs, const ClusterAssignment& assign, int cluster) {
    check_assignment(seqs, assign);
    StateMatrix<std::uint64_t> counts{};
    std::size_t members = 0;
    for (std::size_t n = 0; n < seqs.size(); ++n) {
        if (assign.labels[n] != cluster) continue;
        ++members;
        accumulate_transitions(seqs.sequences[n].symbols, counts);
    }
    if (members == 0) throw Error("cluster " + std::to_string(cluster) + " has no sequences");
    return TransitionMatrix::from_counts(counts);
}

HittingTimes hitting_times(const TransitionMatrix& tm) {
    // reaches_nc[i]: a positive-probability path from i to NC exists.
    StateVector<bool> reaches_nc{};
    reaches_nc[index(State::NC)] = true;
    for (bool changed = true; changed;) {
        changed = false;
        for (State i : kViolentStates) {
            if (reaches_nc[index(i)]) continue;
            for (State j : kAllStates) {
                if (tm.p(i, j) > 0.0 && reaches_nc[index(j)]) {
                    reaches_nc[index(i)] = true;
                    changed = true;
                    break;
                }
            }
        }
    }
    // Finite iff nothing reachable through violent states is a dead end.
    StateVector<bool> finite{};
    for (State i : kViolentStates) {
        StateVector<bool> seen{};
        std::vector<State> stack{i};
        seen[index(i)] = true;
        bool ok = true;
        while (!stack.empty() && ok) {
            const State u = stack.back();
            stack.pop_back();
            if (!reaches_nc[index(u)]) ok = false;
            for (State v : kViolentStates) {
                if (tm.p(u, v) > 0.0 && !seen[index(v)]) {
                    seen[index(v)] = true;
                    stack.push_back(v);
                }
            }
        }
        finite[index(i)] = ok;
    }

    std::vector<State> live;
    for (State i : kViolentStates) {
        if (finite[index(i)]) live.push_back(i);
    }
    HittingTimes ht;
    for (State i : kViolentStates) ht.h[index(i)] = kInf;
    if (live.empty()) return ht;

    const auto m = static_cast<Eigen::Index>(live.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) A(r, c) -= tm.p(live[static_cast<std::size_t>(r)], live[static_cast<std::size_t>(c)]);

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::VectorXd h = lu.solve(ones);
    const double residual = (A * h - ones).lpNorm<Eigen::Infinity>();
    if (!lu.isInvertible() || !h.allFinite() || residual > 1e-9) {
        std::ostringstream msg;
        msg << "hitting_times: singular system (rank " << lu.rank() << " of " << m << ", residual " << residual
            << ") for I - Q =\n"
            << A;
        throw Error(msg.str());
    }
    for (Eigen::Index r = 0; r < m; ++r) ht.h[index(live[static_cast<std::size_t>(r)])] = h(r);
    return ht;
}

double mvst(const HittingTimes& ht, const StateVector<double>& start) {
    if (start[index(State::NC)] != 0.0) throw Error("mvst: start distribution puts weight on NC");
    double total = 0.0;
    for (double w : start) {
        if (!(w >= 0.0)) throw Error("mvst: negative start weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("mvst: start distribution must sum to 1");
    double acc = 0.0;
    for (State s : kViolentStates) {
        const double w = start[index(s)];
        if (w == 0.0) continue;
        if (std::isinf(ht[s])) return kInf;
        acc += w * ht[s];
    }
    return acc;
}

double mvst(const TransitionMatrix& tm, const StateVector<double>& start) { return mvst(hitting_times(tm), start); }

StateVector<double> start_distribution(const SequenceSet& seqs, const ClusterAssignment& assign, int cluster,
                                       StartRule rule) {
    const auto member = members_of(seqs, assign, cluster);
    if (std::find(member.begin(), member.end(), true) == member.end()) {
        throw Error("cluster " + std::to_string(cluster) + " has no sequences");
    }
    bool any = false;
    auto w = start_weights_of(seqs, member, rule, any);
    if (!any) throw Error("cluster " + std::to_string(cluster) + " has no violent spell");
    return w;
}

std::string TransitionStat::label() const {
    if (pairs.empty()) return "";
    auto join = [](const std::vector<State>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += '/';
            s += to_string(v[i]);
        }
        return s;
    };
    std::vector<State> froms, tos;
    for (const auto& [f, t] : pairs) {
        if (std::find(froms.begin(), froms.end(), f) == froms.end()) froms.push_back(f);
        if (std::find(tos.begin(), tos.end(), t) == tos.end()) tos.push_back(t);
    }
    if (froms.size() == 1 || tos.size() == 1) return join(froms) + ">" + join(tos);
    std::string s;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) s += '/';
        s += std::string(to_string(pairs[i].first)) + ">" + std::string(to_string(pairs[i].second));
    }
    return s;
}

TrajectorySummary trajectory_summary(const SequenceSet& seqs, const ClusterAssignment& assign, int cluster,
                                     StartRule rule) {
    return summarize_members(seqs, members_of(seqs, assign, cluster), cluster, rule);
}

TrajectorySummary all_cells_summary(const SequenceSet& seqs, StartRule rule) {
    return summarize_members(seqs, std::vector<bool>(seqs.size(), true), 0, rule);
}

void write_summary_csv(std::ostream& out, const std::vector<TrajectorySummary>& rows,
                       const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.comment("most_frequent_start: NC>X maximising count(NC>X); share = count(NC>X) / count(NC>any), NC>NC included");
    w.comment("most_frequent_repetition: X>X over violent X maximising p(X|X) = count(X>X) / count(X>any)");
    w.comment("most_frequent_transition: X>Y over violent X != Y maximising p(Y|X)");
    w.comment("most_frequent_terminus: X>NC over violent X maximising p(NC|X)");
    w.comment("mvst_years: sum_X w(X) h(X); w = starting-state distribution, h = expected years to reach NC; inf = no finite stopping time under the empirical chain");
    w.comment("ties are joined with '/'");
    w.row({"cluster", "n_cells", "most_frequent_start", "start_share", "most_frequent_repetition", "repetition_prob",
           "most_frequent_transition", "transition_prob", "most_frequent_terminus", "terminus_prob", "mvst_years"});
    auto stat = [&](const std::optional<TransitionStat>& s) {
        if (s) {
            w.field(std::string_view(s->label())).field(s->value);
        } else {
            w.field("").field("");
        }
    };
    for (const auto& r : rows) {
        w.field(r.cluster == 0 ? std::string("all") : std::to_string(r.cluster));
        w.field(r.n_cells);
        stat(r.start);
        stat(r.repetition);
        stat(r.cross);
        stat(r.terminus);
        w.field(r.mvst_years);
        w.end_row();
    }
}

}  // namespace trajseq
