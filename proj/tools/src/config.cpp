#include "config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "manifest.hpp"

namespace trajseq::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Collects every problem instead of stopping at the first one.
class Problems {
public:
    void add(std::string msg) { list_.push_back(std::move(msg)); }
    bool empty() const { return list_.empty(); }

    [[noreturn]] void raise() const {
        std::string msg = "invalid configuration (" + std::to_string(list_.size()) + " problem" +
                          (list_.size() == 1 ? "" : "s") + "):";
        for (const auto& p : list_) msg += "\n  - " + p;
        throw Error(msg);
    }

private:
    std::vector<std::string> list_;
};

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed,
                Problems& problems) {
    if (!obj.is_object()) {
        problems.add(where + ": expected an object");
        return;
    }
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) problems.add(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
std::optional<T> get(const json& obj, const char* key, const std::string& where, Problems& problems) {
    if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        problems.add(where + "." + key + ": wrong type");
        return std::nullopt;
    }
}

std::string rel(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.lexically_relative(base).generic_string();
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error(std::string("configuration is not valid JSON: ") + e.what());
    }
    Problems problems;
    PipelineConfig cfg;
    cfg.base_dir = base_dir;
    check_keys(j, "config",
               {"input", "columns", "event_types", "event_type_aliases", "span", "grid", "scdi", "sequences", "costs",
                "distances", "cluster", "stats", "joins", "seed", "workers", "output_dir"},
               problems);
    if (!j.is_object()) problems.raise();

    auto resolve = [&](const std::string& p) { return (base_dir / p).lexically_normal(); };

    if (j.contains("input")) {
        const auto& in = j["input"];
        check_keys(in, "input", {"events", "scenario"}, problems);
        if (auto p = get<std::string>(in, "events", "input", problems)) cfg.events_path = resolve(*p);
        if (auto p = get<std::string>(in, "scenario", "input", problems)) cfg.scenario_path = resolve(*p);
    }
    if (!cfg.events_path && !cfg.scenario_path) problems.add("input: set 'events' (CSV) or 'scenario' (JSON)");
    if (cfg.events_path && !std::filesystem::exists(*cfg.events_path))
        problems.add("input.events: file not found: " + cfg.events_path->string());
    if (cfg.scenario_path && !std::filesystem::exists(*cfg.scenario_path))
        problems.add("input.scenario: file not found: " + cfg.scenario_path->string());

    if (j.contains("columns")) {
        const auto& c = j["columns"];
        check_keys(c, "columns", {"id", "date", "x", "y", "event_type"}, problems);
        if (auto v = get<std::string>(c, "id", "columns", problems)) cfg.columns.id = *v;
        if (auto v = get<std::string>(c, "date", "columns", problems)) cfg.columns.date = *v;
        if (auto v = get<std::string>(c, "x", "columns", problems)) cfg.columns.x = *v;
        if (auto v = get<std::string>(c, "y", "columns", problems)) cfg.columns.y = *v;
        if (auto v = get<std::string>(c, "event_type", "columns", problems)) cfg.columns.event_type = *v;
    }

    if (auto types = get<std::vector<std::string>>(j, "event_types", "config", problems)) {
        cfg.event_types.clear();
        for (const auto& t : *types) {
            if (auto e = parse_event_type_name(t)) {
                cfg.event_types.insert(*e);
            } else {
                problems.add("event_types: unknown type '" + t + "'");
            }
        }
        if (types->empty()) problems.add("event_types: filter must not be empty");
    }
    if (auto aliases = get<std::map<std::string, std::string>>(j, "event_type_aliases", "config", problems)) {
        for (const auto& [alias, name] : *aliases) {
            if (auto e = parse_event_type_name(name)) {
                cfg.extra_aliases.emplace_back(alias, *e);
            } else {
                problems.add("event_type_aliases: '" + alias + "' maps to unknown type '" + name + "'");
            }
        }
    }

    if (auto span = get<std::vector<int>>(j, "span", "config", problems)) {
        if (span->size() != 2 || (*span)[0] > (*span)[1]) {
            problems.add("span: expected [first_year, last_year] with first <= last");
        } else {
            cfg.span = YearSpan{(*span)[0], (*span)[1]};
        }
    }

    if (j.contains("grid")) {
        const auto& g = j["grid"];
        check_keys(g, "grid", {"origin_x", "origin_y", "cell_size", "n_cols", "n_rows", "bbox", "coordinate_space"},
                   problems);
        const auto cell = get<double>(g, "cell_size", "grid", problems).value_or(0.5);
        const auto crs = get<std::string>(g, "coordinate_space", "grid", problems).value_or("EPSG:4326");
        if (!(cell > 0.0)) problems.add("grid.cell_size: must be > 0");
        if (auto bbox = get<std::vector<double>>(g, "bbox", "grid", problems)) {
            if (g.contains("n_cols") || g.contains("n_rows") || g.contains("origin_x") || g.contains("origin_y")) {
                problems.add("grid: give either 'bbox' or origin/n_cols/n_rows, not both");
            } else if (bbox->size() != 4 || !((*bbox)[0] < (*bbox)[2]) || !((*bbox)[1] < (*bbox)[3])) {
                problems.add("grid.bbox: expected [xmin, ymin, xmax, ymax] with min < max");
            } else if (cell > 0.0) {
                cfg.grid = GridSpec::covering({(*bbox)[0], (*bbox)[1], (*bbox)[2], (*bbox)[3]}, cell, crs);
            }
        } else {
            GridSpec gs;
            gs.origin_x = get<double>(g, "origin_x", "grid", problems).value_or(0.0);
            gs.origin_y = get<double>(g, "origin_y", "grid", problems).value_or(0.0);
            gs.cell_size = cell;
            gs.n_cols = get<std::int32_t>(g, "n_cols", "grid", problems).value_or(0);
            gs.n_rows = get<std::int32_t>(g, "n_rows", "grid", problems).value_or(0);
            gs.coordinate_space = crs;
            if (gs.n_cols < 1 || gs.n_rows < 1) {
                problems.add("grid: n_cols and n_rows must be >= 1 (or give 'bbox')");
            } else if (cell > 0.0) {
                cfg.grid = gs;
            }
        }
    } else if (cfg.events_path) {
        problems.add("grid: required when reading an events file");
    }

    if (j.contains("scdi")) {
        const auto& s = j["scdi"];
        check_keys(s, "scdi", {"threshold_scope", "small_count", "nni_cutoff"}, problems);
        if (auto v = get<std::string>(s, "threshold_scope", "scdi", problems)) {
            if (*v == "global") cfg.scdi.scope = ThresholdScope::global;
            else if (*v == "per_year") cfg.scdi.scope = ThresholdScope::per_year;
            else problems.add("scdi.threshold_scope: expected 'global' or 'per_year'");
        }
        if (auto v = get<std::string>(s, "small_count", "scdi", problems)) {
            if (*v == "dispersed") cfg.scdi.small_count = SmallCountRule::dispersed;
            else if (*v == "clustered") cfg.scdi.small_count = SmallCountRule::clustered;
            else problems.add("scdi.small_count: expected 'dispersed' or 'clustered'");
        }
        if (auto v = get<double>(s, "nni_cutoff", "scdi", problems)) {
            if (!(*v > 0.0)) problems.add("scdi.nni_cutoff: must be > 0");
            cfg.scdi.nni_cutoff = *v;
        }
    }

    if (j.contains("sequences")) {
        check_keys(j["sequences"], "sequences", {"drop_never_violent"}, problems);
        if (auto v = get<bool>(j["sequences"], "drop_never_violent", "sequences", problems)) cfg.drop_never_violent = *v;
    }

    if (j.contains("costs")) {
        const auto& c = j["costs"];
        check_keys(c, "costs", {"indel", "indel_fraction"}, problems);
        if (c.contains("indel") && c.contains("indel_fraction"))
            problems.add("costs: give either 'indel' or 'indel_fraction', not both");
        if (auto v = get<double>(c, "indel", "costs", problems)) {
            if (!(*v > 0.0)) problems.add("costs.indel: must be > 0");
            cfg.indel = *v;
        }
        if (auto v = get<double>(c, "indel_fraction", "costs", problems)) {
            if (!(*v > 0.0)) problems.add("costs.indel_fraction: must be > 0");
            cfg.indel_fraction = *v;
        }
    }

    if (j.contains("distances")) {
        const auto& d = j["distances"];
        check_keys(d, "distances", {"normalize", "csv_max_n"}, problems);
        if (auto v = get<bool>(d, "normalize", "distances", problems)) cfg.normalize = *v;
        if (auto v = get<std::size_t>(d, "csv_max_n", "distances", problems)) cfg.distances_csv_max_n = *v;
    }

    // No default: the number of trajectory types is an analysis choice.
    if (j.contains("cluster")) check_keys(j["cluster"], "cluster", {"k"}, problems);
    if (!j.contains("cluster") || !j["cluster"].contains("k")) problems.add("cluster.k: required");
    else if (auto v = get<int>(j["cluster"], "k", "cluster", problems)) {
        cfg.k = *v;
        if (cfg.k < 1) problems.add("cluster.k: must be >= 1");
    }

    if (j.contains("stats")) {
        check_keys(j["stats"], "stats", {"start_rule"}, problems);
        if (auto v = get<std::string>(j["stats"], "start_rule", "stats", problems)) {
            if (*v == "first_violent") cfg.start_rule = StartRule::first_violent;
            else if (*v == "initial_state") cfg.start_rule = StartRule::initial_state;
            else if (*v == "spell_starts") cfg.start_rule = StartRule::spell_starts;
            else problems.add("stats.start_rule: expected 'first_violent', 'initial_state' or 'spell_starts'");
        }
    }

    if (j.contains("joins")) {
        const auto& js = j["joins"];
        check_keys(js, "joins", {"contiguity", "permutations", "include_never_violent"}, problems);
        if (auto v = get<std::string>(js, "contiguity", "joins", problems)) {
            if (*v == "rook") cfg.contiguity = Contiguity::rook;
            else if (*v == "queen") cfg.contiguity = Contiguity::queen;
            else problems.add("joins.contiguity: expected 'rook' or 'queen'");
        }
        if (auto v = get<std::int64_t>(js, "permutations", "joins", problems)) {
            if (*v != 0 && *v < 99) problems.add("joins.permutations: use 0 (disabled) or at least 99");
            cfg.permutations = static_cast<std::size_t>(std::max<std::int64_t>(*v, 0));
        }
        if (auto v = get<bool>(js, "include_never_violent", "joins", problems)) cfg.include_never_violent = *v;
    }

    if (j.contains("seed")) {
        const auto& s = j["seed"];
        if (s.is_number_unsigned()) {
            cfg.seed = s.get<std::uint64_t>();
        } else if (s.is_string()) {
            try {
                std::size_t used = 0;
                cfg.seed = std::stoull(s.get<std::string>(), &used, 0);
                if (used != s.get<std::string>().size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                problems.add("seed: not an unsigned 64-bit integer");
            }
        } else {
            problems.add("seed: expected an unsigned integer");
        }
    }
    if (auto v = get<unsigned>(j, "workers", "config", problems)) cfg.workers = *v;
    if (auto v = get<std::string>(j, "output_dir", "config", problems)) cfg.output_dir = resolve(*v);
    else cfg.output_dir = resolve("out");

    if (!problems.empty()) problems.raise();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto base = std::filesystem::absolute(path).parent_path();
    return parse_config(ss.str(), base);
}

std::string PipelineConfig::canonical_json() const {
    ordered_json j;
    j["input"]["events"] = events_path ? rel(*events_path, base_dir) : "";
    j["input"]["scenario"] = scenario_path ? rel(*scenario_path, base_dir) : "";
    j["columns"] = {{"id", columns.id}, {"date", columns.date}, {"x", columns.x}, {"y", columns.y},
                    {"event_type", columns.event_type}};
    auto& types = j["event_types"] = ordered_json::array();
    for (EventType t : event_types) types.push_back(std::string(to_string(t)));
    auto& aliases = j["event_type_aliases"] = ordered_json::array();
    for (const auto& [a, t] : extra_aliases) aliases.push_back({a, std::string(to_string(t))});
    if (span) j["span"] = {span->min, span->max};
    else j["span"] = nullptr;
    if (grid) {
        j["grid"] = {{"origin_x", grid->origin_x}, {"origin_y", grid->origin_y}, {"cell_size", grid->cell_size},
                     {"n_cols", grid->n_cols},     {"n_rows", grid->n_rows},     {"coordinate_space", grid->coordinate_space}};
    } else {
        j["grid"] = nullptr;
    }
    j["scdi"] = {{"threshold_scope", scdi.scope == ThresholdScope::global ? "global" : "per_year"},
                 {"small_count", scdi.small_count == SmallCountRule::dispersed ? "dispersed" : "clustered"},
                 {"nni_cutoff", scdi.nni_cutoff}};
    j["sequences"] = {{"drop_never_violent", drop_never_violent}};
    if (indel) j["costs"] = {{"indel", *indel}};
    else j["costs"] = {{"indel_fraction", indel_fraction}};
    j["distances"] = {{"normalize", normalize}, {"csv_max_n", distances_csv_max_n}};
    j["cluster"] = {{"k", k}};
    const char* rule = start_rule == StartRule::first_violent   ? "first_violent"
                       : start_rule == StartRule::initial_state ? "initial_state"
                                                                : "spell_starts";
    j["stats"] = {{"start_rule", rule}};
    j["joins"] = {{"contiguity", contiguity == Contiguity::rook ? "rook" : "queen"},
                  {"permutations", permutations},
                  {"include_never_violent", include_never_violent}};
    j["seed"] = seed;
    return j.dump();
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical_json()); }

}  // namespace trajseq::cli
