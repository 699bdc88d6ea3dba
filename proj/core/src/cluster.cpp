#include "trajseq/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "trajseq/csv.hpp"
#include "trajseq/geojson.hpp"

namespace trajseq {

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

Dendrogram ward_linkage(std::span<const double> condensed, std::size_t n) {
    if (n < 2) throw Error("ward_linkage needs at least two observations");
    if (condensed.size() != DistanceMatrix::condensed_size(n)) throw Error("ward_linkage: condensed size mismatch");

    std::vector<double> d2(condensed.size());
    for (std::size_t k = 0; k < condensed.size(); ++k) {
        const double v = condensed[k];
        if (!(v >= 0.0) || !std::isfinite(v)) throw Error("ward_linkage: distances must be finite and non-negative");
        d2[k] = v * v;
    }
    auto D = [&](std::size_t i, std::size_t j) -> double& {
        return i < j ? d2[DistanceMatrix::condensed_index(i, j, n)] : d2[DistanceMatrix::condensed_index(j, i, n)];
    };

    // Slot i holds the cluster whose smallest leaf is i. next_/prev_ thread
    // the active slots in increasing order.
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> size(n, 1), node(n), next(n), prev(n);
    std::iota(node.begin(), node.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = i + 1 < n ? i + 1 : kNone;
        prev[i] = i > 0 ? i - 1 : kNone;
    }
    std::size_t head = 0;

    // Nearest active partner with a larger slot index; ties -> smaller index.
    std::vector<std::size_t> nn(n, kNone);
    std::vector<double> nn_d(n, std::numeric_limits<double>::infinity());
    auto refresh = [&](std::size_t i) {
        nn[i] = kNone;
        nn_d[i] = std::numeric_limits<double>::infinity();
        for (std::size_t j = next[i]; j != kNone; j = next[j]) {
            const double v = D(i, j);
            if (v < nn_d[i]) {
                nn_d[i] = v;
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    Dendrogram dg;
    dg.n_leaves = n;
    dg.merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t i = kNone;
        for (std::size_t s = head; s != kNone; s = next[s]) {
            if (nn[s] != kNone && (i == kNone || nn_d[s] < nn_d[i])) i = s;
        }
        const std::size_t j = nn[i];
        const double dij = D(i, j);
        const double si = static_cast<double>(size[i]), sj = static_cast<double>(size[j]);

        dg.merges.push_back({std::min(node[i], node[j]), std::max(node[i], node[j]), std::sqrt(dij), size[i] + size[j]});

        for (std::size_t k = head; k != kNone; k = next[k]) {
            if (k == i || k == j) continue;
            const double sk = static_cast<double>(size[k]);
            const double v = ((si + sk) * D(k, i) + (sj + sk) * D(k, j) - sk * dij) / (si + sj + sk);
            D(k, i) = std::max(v, 0.0);
        }

        // Retire slot j.
        if (prev[j] != kNone) next[prev[j]] = next[j];
        if (next[j] != kNone) prev[next[j]] = prev[j];
        size[i] += size[j];
        node[i] = n + step;

        refresh(i);
        for (std::size_t k = head; k != kNone && k < j; k = next[k]) {
            if (k == i) continue;
            if (k < i) {
                if (nn[k] == i || nn[k] == j) {
                    refresh(k);
                } else if (D(k, i) < nn_d[k] || (D(k, i) == nn_d[k] && i < nn[k])) {
                    nn[k] = i;
                    nn_d[k] = D(k, i);
                }
            } else if (nn[k] == j) {
                refresh(k);
            }
        }
    }
    return dg;
}

Dendrogram ward_linkage(const DistanceMatrix& d) { return ward_linkage(d.condensed(), d.size()); }

std::vector<int> cut_labels(const Dendrogram& dg, std::size_t k) {
    const std::size_t n = dg.n_leaves;
    if (k < 1 || k > n) throw Error("cut: k must lie in [1, n_leaves]");
    if (dg.merges.size() + 1 != n) throw Error("cut: dendrogram is incomplete");

    // Representative leaf for every node created so far.
    std::vector<std::size_t> rep(n + dg.merges.size());
    std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), 0);
    UnionFind uf(n);
    for (std::size_t m = 0; m < dg.merges.size(); ++m) {
        const auto& mg = dg.merges[m];
        if (mg.a >= n + m || mg.b >= n + m) throw Error("cut: merge refers to a future node");
        if (m < n - k) uf.unite(rep[mg.a], rep[mg.b]);
        rep[n + m] = std::min(rep[mg.a], rep[mg.b]);
    }

    // Components keyed by smallest leaf (the union-find root).
    std::map<std::size_t, std::size_t> comp_size;
    std::vector<std::size_t> root(n);
    for (std::size_t i = 0; i < n; ++i) {
        root[i] = uf.find(i);
        ++comp_size[root[i]];
    }
    std::vector<std::pair<std::size_t, std::size_t>> order(comp_size.begin(), comp_size.end());
    std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
        return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    std::map<std::size_t, int> label_of;
    for (std::size_t c = 0; c < order.size(); ++c) label_of[order[c].first] = static_cast<int>(c) + 1;

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = label_of[root[i]];
    return labels;
}

ClusterAssignment cut(const Dendrogram& dg, std::size_t k, std::vector<CellId> cells) {
    if (cells.size() != dg.n_leaves) throw Error("cut: one cell label per leaf is required");
    ClusterAssignment a;
    a.labels = cut_labels(dg, k);
    a.cells = std::move(cells);
    a.k = static_cast<int>(k);
    return a;
}

std::vector<std::size_t> ClusterAssignment::sizes() const {
    std::vector<std::size_t> s(static_cast<std::size_t>(std::max(k, 0)), 0);
    for (int l : labels) {
        if (l >= 1 && l <= k) ++s[static_cast<std::size_t>(l - 1)];
    }
    return s;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error("adjusted_rand_index: label vectors differ in length");
    const double n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto pairs = [](double x) { return x * (x - 1) / 2; };
    double index = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [key, v] : table) index += pairs(v);
    for (const auto& [key, v] : rows) sum_rows += pairs(v);
    for (const auto& [key, v] : cols) sum_cols += pairs(v);
    const double expected = sum_rows * sum_cols / pairs(n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

void write_newick(std::ostream& out, const Dendrogram& dg, const std::vector<std::string>& leaf_names) {
    const std::size_t n = dg.n_leaves;
    if (leaf_names.size() != n) throw Error("write_newick: one name per leaf is required");
    if (n == 1) {
        out << leaf_names[0] << ";\n";
        return;
    }
    auto height = [&](std::size_t node) { return node < n ? 0.0 : dg.merges[node - n].height; };

    // Iterative post-order walk from the root.
    struct Frame {
        std::size_t node;
        int stage;
        double parent_height;
    };
    std::vector<Frame> stack{{n + dg.merges.size() - 1, 0, height(n + dg.merges.size() - 1)}};
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.node < n) {
            out << leaf_names[f.node] << ':' << format_double(f.parent_height);
            stack.pop_back();
            continue;
        }
        const Merge& m = dg.merges[f.node - n];
        const double h = m.height;
        if (f.stage == 0) {
            out << '(';
            f.stage = 1;
            stack.push_back({m.a, 0, h - height(m.a)});
        } else if (f.stage == 1) {
            out << ',';
            f.stage = 2;
            stack.push_back({m.b, 0, h - height(m.b)});
        } else {
            out << ')';
            const bool root = stack.size() == 1;
            if (!root) out << ':' << format_double(f.parent_height);
            stack.pop_back();
        }
    }
    out << ";\n";
}

void write_merge_table_csv(std::ostream& out, const Dendrogram& dg, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.comment("n_leaves=" + std::to_string(dg.n_leaves));
    w.row({"step", "node_a", "node_b", "height", "size"});
    for (std::size_t m = 0; m < dg.merges.size(); ++m) {
        const auto& mg = dg.merges[m];
        w.field(m).field(mg.a).field(mg.b).field(mg.height).field(mg.size);
        w.end_row();
    }
}

Dendrogram read_merge_table_csv(std::istream& in, std::size_t n_leaves) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw Error("merge table has no header row");
    const CsvHeader header(fields);
    const std::size_t c_a = header.require("node_a"), c_b = header.require("node_b"), c_h = header.require("height"),
                      c_s = header.require("size");
    Dendrogram dg;
    dg.n_leaves = n_leaves;
    while (reader.next(fields)) {
        if (fields.size() < header.names().size()) throw Error("merge table: short row");
        auto a = parse_int(fields[c_a]), b = parse_int(fields[c_b]), s = parse_int(fields[c_s]);
        auto h = parse_double(fields[c_h]);
        if (!a || !b || !s || !h) throw Error("merge table: invalid field");
        dg.merges.push_back({static_cast<std::size_t>(*a), static_cast<std::size_t>(*b), *h, static_cast<std::size_t>(*s)});
    }
    if (dg.merges.size() + 1 != n_leaves) throw Error("merge table does not match the number of leaves");
    return dg;
}

void write_assignment_csv(std::ostream& out, const ClusterAssignment& a, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.comment("k=" + std::to_string(a.k));
    if (a.never_violent_label) w.comment("never_violent_label=" + std::to_string(*a.never_violent_label));
    w.row({"cell_col", "cell_row", "cluster"});
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        w.field(a.cells[i].col).field(a.cells[i].row).field(a.labels[i]);
        w.end_row();
    }
}

ClusterAssignment read_assignment_csv(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw Error("cluster file has no header row");
    const CsvHeader header(fields);
    const std::size_t c_col = header.require("cell_col"), c_row = header.require("cell_row"),
                      c_cl = header.require("cluster");
    ClusterAssignment a;
    while (reader.next(fields)) {
        if (fields.size() < header.names().size()) throw Error("cluster file: short row");
        auto col = parse_int(fields[c_col]), row = parse_int(fields[c_row]), cl = parse_int(fields[c_cl]);
        if (!col || !row || !cl) throw Error("cluster file: invalid field");
        a.cells.push_back({static_cast<std::int32_t>(*col), static_cast<std::int32_t>(*row)});
        a.labels.push_back(static_cast<int>(*cl));
    }
    for (const auto& c : reader.comments()) {
        const auto line = trim(c);
        if (line.starts_with("k=")) {
            if (auto v = parse_int(line.substr(2))) a.k = static_cast<int>(*v);
        } else if (line.starts_with("never_violent_label=")) {
            if (auto v = parse_int(line.substr(20))) a.never_violent_label = static_cast<int>(*v);
        }
    }
    if (a.k == 0 && !a.labels.empty()) a.k = *std::max_element(a.labels.begin(), a.labels.end());
    return a;
}

void write_assignment_geojson(std::ostream& out, const ClusterAssignment& a, const GridSpec& grid,
                              const std::vector<std::string>& metadata) {
    GeoJsonWriter gj(out, metadata);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        gj.cell(grid, a.cells[i], std::vector<std::pair<std::string, PropertyValue>>{{"cluster", static_cast<long long>(a.labels[i])}});
    }
}

}  // namespace trajseq
