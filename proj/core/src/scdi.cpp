#include "trajseq/scdi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trajseq/csv.hpp"
#include "trajseq/geojson.hpp"

namespace trajseq {

double nearest_neighbor_index(std::span<const Point2> points, double cell_area) {
    const std::size_t n = points.size();
    if (n < 2) throw Error("nearest_neighbor_index needs at least two points");
    if (!(cell_area > 0.0)) throw Error("nearest_neighbor_index needs a positive cell area");

    std::vector<Point2> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best2 = std::numeric_limits<double>::infinity();
        const Point2 p = sorted[i];
        // Sweep outwards in x; stop once the x gap alone exceeds the best.
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = sorted[j].x - p.x;
            if (dx * dx >= best2) break;
            const double dy = sorted[j].y - p.y;
            best2 = std::min(best2, dx * dx + dy * dy);
        }
        for (std::size_t j = i; j-- > 0;) {
            const double dx = p.x - sorted[j].x;
            if (dx * dx >= best2) break;
            const double dy = sorted[j].y - p.y;
            best2 = std::min(best2, dx * dx + dy * dy);
        }
        sum += std::sqrt(best2);
    }
    const double observed = sum / static_cast<double>(n);
    const double expected = 0.5 * std::sqrt(cell_area / static_cast<double>(n));
    return observed / expected;
}

double intensity_threshold(const EventSet& events) {
    if (events.records.empty()) throw Error("intensity_threshold: no violent cell-years to classify");
    const std::size_t T = static_cast<std::size_t>(events.span.length());
    std::vector<std::size_t> keys;
    keys.reserve(events.records.size());
    for (const auto& r : events.records) {
        keys.push_back(events.grid.linear_index(r.cell) * T + static_cast<std::size_t>(r.year - events.span.min));
    }
    std::sort(keys.begin(), keys.end());
    const auto distinct = static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
    return static_cast<double>(events.records.size()) / static_cast<double>(distinct);
}

State classify_cell_year(std::size_t count, double threshold, std::optional<double> nni, const ScdiOptions& options) {
    if (!(threshold > 0.0)) throw Error("classify_cell_year: threshold must be positive");
    if (count == 0) return State::NC;
    const bool high = static_cast<double>(count) > threshold;
    const bool clustered = nni ? *nni < options.nni_cutoff : options.small_count == SmallCountRule::clustered;
    if (clustered) return high ? State::CH : State::CL;
    return high ? State::DH : State::DL;
}

StateField::StateField(GridSpec grid, YearSpan span)
    : grid_(std::move(grid)), span_(span), states_(grid_.n_cells() * static_cast<std::size_t>(span.length()), State::NC) {
    if (span.length() < 1) throw Error("StateField: empty year span");
}

std::size_t StateField::offset(CellId cell, int year) const {
    if (!grid_.contains(cell) || !span_.contains(year)) throw Error("StateField: cell-year outside the lattice");
    return grid_.linear_index(cell) * n_years() + static_cast<std::size_t>(year - span_.min);
}

StateField build_state_field(const EventSet& events, const ScdiOptions& options) {
    StateField field(events.grid, events.span);
    const std::size_t T = field.n_years();
    field.year_thresholds.assign(T, 0.0);
    if (events.records.empty()) return field;

    // Group records by (cell, year).
    std::vector<std::size_t> keys(events.records.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto& r = events.records[i];
        keys[i] = events.grid.linear_index(r.cell) * T + static_cast<std::size_t>(r.year - events.span.min);
    }
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

    struct Group {
        std::size_t key, begin, end;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && keys[order[j]] == keys[order[i]]) ++j;
        groups.push_back({keys[order[i]], i, j});
        i = j;
    }

    field.threshold = static_cast<double>(events.records.size()) / static_cast<double>(groups.size());
    if (options.scope == ThresholdScope::global) {
        field.year_thresholds.assign(T, field.threshold);
    } else {
        std::vector<std::size_t> year_events(T, 0), year_groups(T, 0);
        for (const auto& g : groups) {
            year_events[g.key % T] += g.end - g.begin;
            ++year_groups[g.key % T];
        }
        for (std::size_t t = 0; t < T; ++t) {
            if (year_groups[t] > 0) {
                field.year_thresholds[t] = static_cast<double>(year_events[t]) / static_cast<double>(year_groups[t]);
            }
        }
    }

    const double area = events.grid.cell_area();
    std::vector<Point2> pts;
    for (const auto& g : groups) {
        const std::size_t count = g.end - g.begin;
        std::optional<double> nni;
        if (count >= 2) {
            pts.clear();
            for (std::size_t i = g.begin; i < g.end; ++i) {
                const auto& r = events.records[order[i]];
                pts.push_back({r.x, r.y});
            }
            nni = nearest_neighbor_index(pts, area);
        }
        const std::size_t t = g.key % T;
        const CellId cell = events.grid.cell_at(g.key / T);
        field.set(cell, events.span.min + static_cast<int>(t),
                  classify_cell_year(count, field.year_thresholds[t], nni, options));
    }
    return field;
}

void write_states_csv(std::ostream& out, const StateField& field, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.comment("threshold=" + format_double(field.threshold));
    w.row({"cell_col", "cell_row", "year", "state"});
    const auto& grid = field.grid();
    for (std::size_t lin = 0; lin < grid.n_cells(); ++lin) {
        const CellId c = grid.cell_at(lin);
        const auto states = field.cell_states(c);
        for (std::size_t t = 0; t < states.size(); ++t) {
            w.field(c.col).field(c.row).field(field.span().min + static_cast<int>(t)).field(to_string(states[t]));
            w.end_row();
        }
    }
}

StateField read_states_csv(std::istream& in, const GridSpec& grid, const YearSpan& span) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw Error("states file has no header row");
    const CsvHeader header(fields);
    const std::size_t c_col = header.require("cell_col"), c_row = header.require("cell_row"),
                      c_year = header.require("year"), c_state = header.require("state");

    StateField field(grid, span);
    std::vector<bool> seen(grid.n_cells() * field.n_years(), false);
    std::size_t filled = 0;
    while (reader.next(fields)) {
        const auto where = " (states record " + std::to_string(reader.record_number()) + ")";
        if (fields.size() < header.names().size()) throw Error("short row" + where);
        auto col = parse_int(fields[c_col]);
        auto row = parse_int(fields[c_row]);
        auto year = parse_int(fields[c_year]);
        auto state = parse_state(fields[c_state]);
        if (!col || !row || !year || !state) throw Error("invalid field" + where);
        const CellId cell{static_cast<std::int32_t>(*col), static_cast<std::int32_t>(*row)};
        if (!grid.contains(cell) || !span.contains(static_cast<int>(*year))) throw Error("cell-year outside lattice" + where);
        const std::size_t slot = grid.linear_index(cell) * field.n_years() + static_cast<std::size_t>(*year - span.min);
        if (seen[slot]) throw Error("duplicate cell-year" + where);
        seen[slot] = true;
        ++filled;
        field.set(cell, static_cast<int>(*year), *state);
    }
    if (filled != seen.size()) throw Error("states file does not cover the full cell-year lattice");
    for (const auto& c : reader.comments()) {
        if (c.starts_with(" threshold=")) {
            if (auto v = parse_double(std::string_view(c).substr(11))) field.threshold = *v;
        }
    }
    field.year_thresholds.assign(field.n_years(), field.threshold);
    return field;
}

void write_states_geojson(std::ostream& out, const StateField& field, const std::vector<std::string>& comments) {
    GeoJsonWriter gj(out, comments);
    const auto& grid = field.grid();
    for (std::size_t lin = 0; lin < grid.n_cells(); ++lin) {
        const CellId c = grid.cell_at(lin);
        const auto states = field.cell_states(c);
        if (std::none_of(states.begin(), states.end(), is_violent)) continue;
        std::vector<std::pair<std::string, std::string>> props;
        props.reserve(states.size());
        for (std::size_t t = 0; t < states.size(); ++t) {
            props.emplace_back("y" + std::to_string(field.span().min + static_cast<int>(t)), std::string(to_string(states[t])));
        }
        gj.cell(grid, c, props);
    }
}

}  // namespace trajseq
