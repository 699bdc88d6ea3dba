#include "trajseq/om.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>

#include "trajseq/csv.hpp"
#include "trajseq/parallel.hpp"

namespace trajseq {

namespace {

using SubTable = std::array<double, kNumStates * kNumStates>;

SubTable flatten(const CostMatrix& costs) {
    SubTable t{};
    for (std::size_t i = 0; i < kNumStates; ++i)
        for (std::size_t j = 0; j < kNumStates; ++j) t[i * kNumStates + j] = costs.sub[i][j];
    return t;
}

// Rolling single-row DP. Every kernel in this file evaluates a cell as
// min(min(up + indel, left + indel), diag + sub) so results agree bit for bit.
double om_row_dp(const std::uint8_t* a, std::size_t la, const std::uint8_t* b, std::size_t lb, const SubTable& sub,
                 double indel, double* row) {
    for (std::size_t j = 0; j <= lb; ++j) row[j] = static_cast<double>(j) * indel;
    for (std::size_t i = 1; i <= la; ++i) {
        const double* srow = sub.data() + a[i - 1] * kNumStates;
        double diag = row[0];
        double left = static_cast<double>(i) * indel;
        row[0] = left;
        for (std::size_t j = 1; j <= lb; ++j) {
            const double up = row[j];
            const double v = std::min(std::min(up + indel, left + indel), diag + srow[b[j - 1]]);
            diag = up;
            row[j] = v;
            left = v;
        }
    }
    return row[lb];
}

// Lanes of independent alignments against the same `a`; the lanes share no
// data dependencies so the inner loop vectorizes.
constexpr std::size_t kLanes = 8;

struct BatchScratch {
    std::vector<double> row;       // (lb + 1) x kLanes
    std::vector<double> sub_cols;  // kNumStates x lb x kLanes: sub[s][b_k[j]]
};

void om_batch(const std::uint8_t* a, std::size_t la, const std::uint8_t* const* bs, std::size_t lb,
              const SubTable& sub, double indel, BatchScratch& scratch, double* out) {
    scratch.row.resize((lb + 1) * kLanes);
    scratch.sub_cols.resize(kNumStates * lb * kLanes);
    double* row = scratch.row.data();
    double* cols = scratch.sub_cols.data();
    for (std::size_t s = 0; s < kNumStates; ++s)
        for (std::size_t j = 0; j < lb; ++j)
            for (std::size_t k = 0; k < kLanes; ++k) cols[(s * lb + j) * kLanes + k] = sub[s * kNumStates + bs[k][j]];

    for (std::size_t j = 0; j <= lb; ++j)
        for (std::size_t k = 0; k < kLanes; ++k) row[j * kLanes + k] = static_cast<double>(j) * indel;

    alignas(64) double diag[kLanes];
    alignas(64) double left[kLanes];
    for (std::size_t i = 1; i <= la; ++i) {
        const double* scol = cols + static_cast<std::size_t>(a[i - 1]) * lb * kLanes;
        const double first = static_cast<double>(i) * indel;
        for (std::size_t k = 0; k < kLanes; ++k) {
            diag[k] = row[k];
            left[k] = first;
            row[k] = first;
        }
        for (std::size_t j = 1; j <= lb; ++j) {
            double* r = row + j * kLanes;
            const double* sc = scol + (j - 1) * kLanes;
            for (std::size_t k = 0; k < kLanes; ++k) {
                const double up = r[k];
                const double v = std::min(std::min(up + indel, left[k] + indel), diag[k] + sc[k]);
                diag[k] = up;
                r[k] = v;
                left[k] = v;
            }
        }
    }
    for (std::size_t k = 0; k < kLanes; ++k) out[k] = row[lb * kLanes + k];
}

std::vector<std::uint8_t> encode(std::span<const State> s) {
    std::vector<std::uint8_t> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = static_cast<std::uint8_t>(index(s[i]));
    return out;
}

double normalized(double d, std::size_t la, std::size_t lb, const OmOptions& options) {
    if (!options.normalize) return d;
    const std::size_t m = std::max(la, lb);
    return m == 0 ? 0.0 : d / static_cast<double>(m);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("distance matrix file is truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("distance matrix file is truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

constexpr char kMagic[8] = {'T', 'R', 'J', 'D', 'I', 'S', 'T', '1'};

}  // namespace

double om_distance(std::span<const State> a, std::span<const State> b, const CostMatrix& costs,
                   const OmOptions& options) {
    const auto ea = encode(a);
    const auto eb = encode(b);
    std::vector<double> row(b.size() + 1);
    const double d = om_row_dp(ea.data(), ea.size(), eb.data(), eb.size(), flatten(costs), costs.indel, row.data());
    return normalized(d, a.size(), b.size(), options);
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<CellId> labels)
    : n_(n), d_(condensed_size(n), 0.0), labels_(std::move(labels)) {
    if (labels_.size() != n_) throw Error("DistanceMatrix: label count differs from n");
}

DistanceMatrix pairwise_distances(const SequenceSet& seqs, const CostMatrix& costs, unsigned workers,
                                  const OmOptions& options) {
    const std::size_t n = seqs.size();
    if (n < 2) throw Error("pairwise_distances needs at least two sequences");
    costs.validate();

    std::vector<CellId> labels;
    labels.reserve(n);
    std::vector<std::vector<std::uint8_t>> enc;
    enc.reserve(n);
    for (const auto& s : seqs.sequences) {
        labels.push_back(s.cell);
        enc.push_back(encode(s.symbols));
    }
    DistanceMatrix dm(n, std::move(labels));
    const SubTable sub = flatten(costs);
    const double indel = costs.indel;
    const bool equal_lengths = std::all_of(enc.begin(), enc.end(),
                                           [&](const auto& e) { return e.size() == enc.front().size(); });
    auto out = dm.condensed();

    // Task = one row i of the upper triangle; rows shrink, so claim them
    // dynamically from the front.
    parallel_for(n - 1, workers, [&](std::size_t i) {
        thread_local BatchScratch scratch;
        thread_local std::vector<double> row;
        const auto& a = enc[i];
        const std::size_t base = DistanceMatrix::condensed_index(i, i + 1, n);
        std::size_t j = i + 1;
        if (equal_lengths) {
            const std::size_t lb = a.size();
            const std::uint8_t* bs[kLanes];
            double lane_out[kLanes];
            for (; j + kLanes <= n; j += kLanes) {
                for (std::size_t k = 0; k < kLanes; ++k) bs[k] = enc[j + k].data();
                om_batch(a.data(), a.size(), bs, lb, sub, indel, scratch, lane_out);
                for (std::size_t k = 0; k < kLanes; ++k) {
                    out[base + (j + k - i - 1)] = normalized(lane_out[k], a.size(), lb, options);
                }
            }
        }
        for (; j < n; ++j) {
            const auto& b = enc[j];
            row.resize(b.size() + 1);
            const double d = om_row_dp(a.data(), a.size(), b.data(), b.size(), sub, indel, row.data());
            out[base + (j - i - 1)] = normalized(d, a.size(), b.size(), options);
        }
    });
    return dm;
}

void write_distance_matrix(std::ostream& out, const DistanceMatrix& d) {
    out.write(kMagic, sizeof kMagic);
    put_u64(out, d.size());
    for (const auto& c : d.labels()) {
        put_u32(out, static_cast<std::uint32_t>(c.col));
        put_u32(out, static_cast<std::uint32_t>(c.row));
    }
    for (double v : d.condensed()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw Error("failed writing distance matrix");
}

DistanceMatrix read_distance_matrix(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error("not a trajseq distance matrix (bad magic)");
    const std::uint64_t n = get_u64(in);
    if (n > (1ULL << 32)) throw Error("distance matrix header is implausible");
    std::vector<CellId> labels(n);
    for (auto& c : labels) {
        c.col = static_cast<std::int32_t>(get_u32(in));
        c.row = static_cast<std::int32_t>(get_u32(in));
    }
    DistanceMatrix d(n, std::move(labels));
    for (double& v : d.condensed()) v = std::bit_cast<double>(get_u64(in));
    if (in.peek() != std::char_traits<char>::eof()) throw Error("distance matrix file has trailing bytes");
    return d;
}

void write_distance_matrix_csv(std::ostream& out, const DistanceMatrix& d, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    auto label = [](CellId c) { return std::to_string(c.col) + "_" + std::to_string(c.row); };
    w.field("cell");
    for (const auto& c : d.labels()) w.field(std::string_view(label(c)));
    w.end_row();
    for (std::size_t i = 0; i < d.size(); ++i) {
        w.field(std::string_view(label(d.labels()[i])));
        for (std::size_t j = 0; j < d.size(); ++j) w.field(d.at(i, j));
        w.end_row();
    }
}

}  // namespace trajseq
