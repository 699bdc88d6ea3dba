#include "trajseq/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "trajseq/chains.hpp"
#include "trajseq/random.hpp"

namespace trajseq {

namespace {

using nlohmann::json;

bool is_clustered(State s) { return s == State::CL || s == State::CH; }

State draw_state(SplitMix64& rng, const StateVector<double>& p) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < kNumStates; ++i) {
        acc += p[i];
        if (u < acc) return state_from_index(i);
    }
    // Rounding left a sliver above the last positive entry.
    for (std::size_t i = kNumStates; i-- > 0;) {
        if (p[i] > 0.0) return state_from_index(i);
    }
    return State::NC;
}

StateVector<double> parse_distribution(const json& j, const std::string& where) {
    if (!j.is_object()) throw Error(where + ": expected an object of state -> probability");
    StateVector<double> p{};
    for (const auto& [key, value] : j.items()) {
        const auto s = parse_state(key);
        if (!s) throw Error(where + ": unknown state '" + key + "'");
        if (!value.is_number()) throw Error(where + "." + key + ": expected a number");
        p[index(*s)] = value.get<double>();
    }
    return p;
}

void emit_points(SplitMix64& rng, State s, const EmissionSpec& em, const Bounds& cell, double cell_size, int count,
                 std::vector<Point2>& out) {
    out.clear();
    const double eps = cell_size * 1e-9;
    auto clamp_into = [&](double v, double lo, double hi) { return std::clamp(v, lo + eps, hi - eps); };
    if (is_clustered(s)) {
        const double cx = cell.xmin + cell_size * rng.uniform(0.2, 0.8);
        const double cy = cell.ymin + cell_size * rng.uniform(0.2, 0.8);
        const double sd = em.spread * cell_size;
        for (int k = 0; k < count; ++k) {
            out.push_back({clamp_into(cx + sd * rng.normal(), cell.xmin, cell.xmax),
                           clamp_into(cy + sd * rng.normal(), cell.ymin, cell.ymax)});
        }
        return;
    }
    const auto g = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    const double sub = cell_size / static_cast<double>(g);
    std::vector<std::size_t> slots(g * g);
    std::iota(slots.begin(), slots.end(), 0);
    for (int k = 0; k < count; ++k) {
        const auto pick = static_cast<std::size_t>(k) + rng.below(slots.size() - static_cast<std::size_t>(k));
        std::swap(slots[static_cast<std::size_t>(k)], slots[pick]);
        const std::size_t slot = slots[static_cast<std::size_t>(k)];
        const double x = cell.xmin + sub * (static_cast<double>(slot % g) + 0.5 + rng.uniform(-em.spread, em.spread));
        const double y = cell.ymin + sub * (static_cast<double>(slot / g) + 0.5 + rng.uniform(-em.spread, em.spread));
        out.push_back({clamp_into(x, cell.xmin, cell.xmax), clamp_into(y, cell.ymin, cell.ymax)});
    }
}

}  // namespace

StateVector<EmissionSpec> ScenarioConfig::default_emission() {
    StateVector<EmissionSpec> e{};
    e[index(State::NC)] = {0, 0, 0.0};
    e[index(State::CL)] = {2, 4, 0.03};
    e[index(State::CH)] = {40, 60, 0.03};
    e[index(State::DL)] = {2, 4, 0.1};
    e[index(State::DH)] = {40, 60, 0.1};
    return e;
}

void ScenarioConfig::validate() const {
    std::vector<std::string> problems;
    try {
        grid.validate();
    } catch (const Error& e) {
        problems.emplace_back(e.what());
    }
    if (span.min > span.max) problems.emplace_back("span is empty");
    for (State s : kViolentStates) {
        const auto& em = emission[index(s)];
        if (em.count_min < 1 || em.count_max < em.count_min) {
            problems.push_back("emission " + std::string(to_string(s)) + ": need 1 <= count_min <= count_max");
        }
        if (!(em.spread >= 0.0)) problems.push_back("emission " + std::string(to_string(s)) + ": spread must be >= 0");
        if (!is_clustered(s) && em.spread >= 0.5) {
            problems.push_back("emission " + std::string(to_string(s)) + ": dispersed jitter must be < 0.5");
        }
    }
    if (regions.empty()) problems.emplace_back("scenario has no regions");
    for (std::size_t r = 0; r < regions.size(); ++r) {
        const auto& reg = regions[r];
        const std::string where = "region '" + reg.name + "'";
        if (reg.col_begin < 0 || reg.row_begin < 0 || reg.col_end > grid.n_cols || reg.row_end > grid.n_rows ||
            reg.col_begin >= reg.col_end || reg.row_begin >= reg.row_end) {
            problems.push_back(where + ": cell block is empty or outside the grid");
        }
        if (std::abs(std::accumulate(reg.initial.begin(), reg.initial.end(), 0.0) - 1.0) > 1e-9) {
            problems.push_back(where + ": initial distribution must sum to 1");
        }
        for (State s : kAllStates) {
            const auto& row = reg.chain[index(s)];
            if (std::any_of(row.begin(), row.end(), [](double v) { return !(v >= 0.0); }) ||
                std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) > 1e-9) {
                problems.push_back(where + ": chain row " + std::string(to_string(s)) + " must be a probability vector");
            }
        }
        for (std::size_t q = 0; q < r; ++q) {
            const auto& o = regions[q];
            if (reg.col_begin < o.col_end && o.col_begin < reg.col_end && reg.row_begin < o.row_end &&
                o.row_begin < reg.row_end) {
                problems.push_back(where + " overlaps region '" + o.name + "'");
            }
        }
    }
    if (!problems.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw Error(msg);
    }
}

ScenarioConfig scenario_from_json(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("scenario is not valid JSON: ") + e.what());
    }
    ScenarioConfig sc;
    try {
        const auto& g = j.at("grid");
        sc.grid.origin_x = g.value("origin_x", 0.0);
        sc.grid.origin_y = g.value("origin_y", 0.0);
        sc.grid.cell_size = g.value("cell_size", 1.0);
        sc.grid.n_cols = g.at("n_cols").get<std::int32_t>();
        sc.grid.n_rows = g.at("n_rows").get<std::int32_t>();
        sc.grid.coordinate_space = g.value("coordinate_space", std::string("synthetic"));
        if (j.contains("span")) {
            sc.span.min = j["span"].at(0).get<int>();
            sc.span.max = j["span"].at(1).get<int>();
        }
        if (j.contains("emission")) {
            for (const auto& [key, value] : j["emission"].items()) {
                const auto s = parse_state(key);
                if (!s || *s == State::NC) throw Error("emission: unknown violent state '" + key + "'");
                auto& em = sc.emission[index(*s)];
                if (value.contains("count")) {
                    em.count_min = value["count"].at(0).get<int>();
                    em.count_max = value["count"].at(1).get<int>();
                }
                em.spread = value.value("spread", em.spread);
            }
        }
        for (const auto& r : j.at("regions")) {
            RegionSpec reg;
            reg.name = r.value("name", "region" + std::to_string(sc.regions.size()));
            const auto& cells = r.at("cells");
            reg.col_begin = cells.at(0).get<std::int32_t>();
            reg.row_begin = cells.at(1).get<std::int32_t>();
            reg.col_end = cells.at(2).get<std::int32_t>();
            reg.row_end = cells.at(3).get<std::int32_t>();
            reg.initial = r.contains("initial") ? parse_distribution(r["initial"], reg.name + ".initial")
                                                : StateVector<double>{1.0, 0, 0, 0, 0};
            for (State s : kAllStates) reg.chain[index(s)][index(State::NC)] = 1.0;
            for (const auto& [from, row] : r.at("chain").items()) {
                const auto s = parse_state(from);
                if (!s) throw Error(reg.name + ".chain: unknown state '" + from + "'");
                reg.chain[index(*s)] = parse_distribution(row, reg.name + ".chain." + from);
            }
            sc.regions.push_back(std::move(reg));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("scenario has an invalid field: ") + e.what());
    }
    sc.validate();
    return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

SyntheticResult generate_synthetic(const ScenarioConfig& scenario, std::uint64_t seed) {
    scenario.validate();
    const GridSpec& grid = scenario.grid;
    const YearSpan span = scenario.span;

    SyntheticResult res;
    res.events.grid = grid;
    res.events.span = span;
    res.planted = StateField(grid, span);
    res.region_of_cell.assign(grid.n_cells(), -1);

    for (std::size_t r = 0; r < scenario.regions.size(); ++r) {
        const auto& reg = scenario.regions[r];
        TransitionMatrix tm;
        tm.probs = reg.chain;
        const auto ht = hitting_times(tm);
        // Violent states the chain can actually visit.
        StateVector<bool> visited{};
        std::vector<State> stack;
        for (State s : kAllStates) {
            if (reg.initial[index(s)] > 0.0) {
                visited[index(s)] = true;
                stack.push_back(s);
            }
        }
        while (!stack.empty()) {
            const State u = stack.back();
            stack.pop_back();
            for (State v : kAllStates) {
                if (reg.chain[index(u)][index(v)] > 0.0 && !visited[index(v)]) {
                    visited[index(v)] = true;
                    stack.push_back(v);
                }
            }
        }
        for (State s : kViolentStates) {
            if (visited[index(s)] && std::isinf(ht[s])) {
                res.warnings.push_back("region '" + reg.name + "': NC is not reached almost surely from " +
                                       std::string(to_string(s)) + "; mean violence stopping time will be infinite");
            }
        }
    }

    std::vector<Point2> pts;
    std::size_t serial = 0;
    for (std::size_t lin = 0; lin < grid.n_cells(); ++lin) {
        const CellId cell = grid.cell_at(lin);
        int region = -1;
        for (std::size_t r = 0; r < scenario.regions.size(); ++r) {
            if (scenario.regions[r].contains(cell)) region = static_cast<int>(r);
        }
        res.region_of_cell[lin] = region;
        if (region < 0) continue;
        const auto& reg = scenario.regions[static_cast<std::size_t>(region)];

        SplitMix64 chain_rng(derive_seed(seed, "synthetic-chain", lin));
        SplitMix64 event_rng(derive_seed(seed, "synthetic-events", lin));
        State s = draw_state(chain_rng, reg.initial);
        const Bounds box = grid.cell_bounds(cell);
        for (int year = span.min; year <= span.max; ++year) {
            if (year > span.min) s = draw_state(chain_rng, reg.chain[index(s)]);
            res.planted.set(cell, year, s);
            if (!is_violent(s)) continue;
            const auto& em = scenario.emission[index(s)];
            const int count = static_cast<int>(event_rng.between(em.count_min, em.count_max));
            emit_points(event_rng, s, em, box, grid.cell_size, count, pts);

            using namespace std::chrono;
            const sys_days jan1{std::chrono::year{year} / January / 1};
            const int days = std::chrono::year{year}.is_leap() ? 366 : 365;
            for (const auto& p : pts) {
                EventRecord rec;
                rec.id = "SYN" + std::to_string(++serial);
                rec.date = year_month_day{jan1 + std::chrono::days{event_rng.below(static_cast<std::uint64_t>(days))}};
                rec.year = year;
                rec.x = p.x;
                rec.y = p.y;
                rec.type = EventType::battle;
                rec.cell = cell;
                res.events.records.push_back(std::move(rec));
            }
        }
    }
    return res;
}

}  // namespace trajseq
