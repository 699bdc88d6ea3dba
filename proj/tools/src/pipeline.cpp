#include "pipeline.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "manifest.hpp"
#include "trajseq/chains.hpp"
#include "trajseq/cluster.hpp"
#include "trajseq/csv.hpp"
#include "trajseq/geojson.hpp"
#include "trajseq/om.hpp"
#include "trajseq/random.hpp"
#include "trajseq/scdi.hpp"
#include "trajseq/sequences.hpp"
#include "trajseq/spatial.hpp"
#include "trajseq/synthetic.hpp"

#ifndef TRAJSEQ_VERSION
#define TRAJSEQ_VERSION "0.0.0"
#endif

namespace trajseq::cli {

namespace fs = std::filesystem;

namespace {

// Artifact names inside the output directory.
constexpr const char* kSynthEvents = "synthetic_events.csv";
constexpr const char* kSynthTruth = "synthetic_truth.csv";
constexpr const char* kEvents = "events.csv";
constexpr const char* kRejects = "rejects.csv";
constexpr const char* kStates = "states.csv";
constexpr const char* kStatesGeo = "states.geojson";
constexpr const char* kSequences = "sequences.csv";
constexpr const char* kTransitions = "transitions.csv";
constexpr const char* kTransitionCounts = "transition_counts.csv";
constexpr const char* kCosts = "costs.csv";
constexpr const char* kDistances = "distances.bin";
constexpr const char* kDistancesCsv = "distances.csv";
constexpr const char* kNewick = "dendrogram.nwk";
constexpr const char* kMerges = "merges.csv";
constexpr const char* kClusters = "clusters.csv";
constexpr const char* kClustersGeo = "clusters.geojson";
constexpr const char* kSummary = "summary.csv";
constexpr const char* kHitting = "hitting_times.csv";
constexpr const char* kJoins = "joins.csv";
constexpr const char* kJoinsMatrix = "joins_matrix.csv";
constexpr const char* kReportDir = "report";

std::string cluster_transitions_name(int c) { return "transitions_cluster_" + std::to_string(c) + ".csv"; }

struct StageContext {
    Stage stage;
    const PipelineConfig& cfg;
    std::ostream& log;
    Manifest manifest;

    StageContext(Stage s, const PipelineConfig& c, std::ostream& l) : stage(s), cfg(c), log(l) {
        manifest.stage = std::string(to_string(s));
        manifest.version = version();
        manifest.config_hash = cfg.hash();
        manifest.seed = cfg.seed;
        manifest.workers = cfg.workers;
        fs::create_directories(cfg.output_dir);
    }

    fs::path out(const fs::path& name) const { return cfg.output_dir / name; }

    /// Upstream artifact; throws naming the stage that writes it.
    fs::path need(const char* name, Stage producer) {
        const auto p = out(name);
        if (!fs::exists(p)) {
            throw Error("missing artifact " + p.string() + ": run the '" + std::string(to_string(producer)) +
                        "' stage first");
        }
        manifest.inputs.push_back(p);
        return p;
    }

    std::ifstream open_in(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw Error("cannot open " + p.string());
        return in;
    }

    /// Opens an output; the file is hashed into the manifest at finish().
    std::ofstream open_out(const fs::path& name) {
        const auto p = out(name);
        fs::create_directories(p.parent_path());
        std::ofstream o(p, std::ios::binary);
        if (!o) throw Error("cannot write " + p.string());
        manifest.outputs.push_back(p);
        return o;
    }

    std::vector<std::string> header() const {
        return {"trajseq " + manifest.version + " stage=" + manifest.stage, "config_hash=" + manifest.config_hash,
                "seed=" + std::to_string(cfg.seed)};
    }

    void warn(const std::string& msg) {
        log << "warning: " << msg << '\n';
        manifest.notes.push_back(msg);
    }

    void finish() {
        write_manifest(cfg.output_dir, manifest);
        log << "[" << manifest.stage << "] wrote " << manifest.outputs.size() << " artifact(s) to "
            << cfg.output_dir.string() << '\n';
    }
};

std::optional<ScenarioConfig> scenario_of(const PipelineConfig& cfg) {
    if (!cfg.scenario_path) return std::nullopt;
    return load_scenario(*cfg.scenario_path);
}

GridSpec grid_of(const PipelineConfig& cfg) {
    if (cfg.grid) return *cfg.grid;
    if (auto sc = scenario_of(cfg)) return sc->grid;
    throw Error("no grid configured");
}

YearSpan span_of(const PipelineConfig& cfg) {
    if (cfg.span) return *cfg.span;
    if (!cfg.events_path) {
        if (auto sc = scenario_of(cfg)) return sc->span;
    }
    return YearSpan{};
}

std::string cell_name(CellId c) { return "c" + std::to_string(c.col) + "_r" + std::to_string(c.row); }

SequenceSet load_sequences(StageContext& ctx) {
    auto in = ctx.open_in(ctx.need(kSequences, Stage::sequences));
    return read_sequences_csv(in);
}

ClusterAssignment load_clusters(StageContext& ctx, const SequenceSet& seqs) {
    auto in = ctx.open_in(ctx.need(kClusters, Stage::cluster));
    auto a = read_assignment_csv(in);
    if (a.cells.size() != seqs.size()) throw Error("clusters.csv does not match sequences.csv; rerun 'cluster'");
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (a.cells[i] != seqs.sequences[i].cell) {
            throw Error("clusters.csv cell order differs from sequences.csv; rerun 'cluster'");
        }
    }
    return a;
}

StateField load_states(StageContext& ctx) {
    auto in = ctx.open_in(ctx.need(kStates, Stage::classify));
    return read_states_csv(in, grid_of(ctx.cfg), span_of(ctx.cfg));
}

// ---------------------------------------------------------------------------

void stage_synth(StageContext& ctx) {
    if (!ctx.cfg.scenario_path) throw Error("synth: the config has no input.scenario");
    ctx.manifest.inputs.push_back(*ctx.cfg.scenario_path);
    const auto sc = load_scenario(*ctx.cfg.scenario_path);
    const auto res = generate_synthetic(sc, derive_seed(ctx.cfg.seed, "synth"));
    for (const auto& w : res.warnings) ctx.warn(w);

    // Raw layout with the default ACLED column names so `ingest` reads it
    // like any export.
    {
        auto o = ctx.open_out(kSynthEvents);
        CsvWriter w(o);
        for (const auto& c : ctx.header()) w.comment(c);
        w.row({"event_id_cnty", "event_date", "year", "longitude", "latitude", "event_type"});
        for (const auto& r : res.events.records) {
            w.field(r.id).field(format_date(r.date)).field(r.year).field(r.x).field(r.y).field("Battles");
            w.end_row();
        }
    }
    {
        auto o = ctx.open_out(kSynthTruth);
        CsvWriter w(o);
        for (const auto& c : ctx.header()) w.comment(c);
        w.row({"cell_col", "cell_row", "region", "year", "state"});
        const auto& grid = sc.grid;
        for (std::size_t lin = 0; lin < grid.n_cells(); ++lin) {
            const int region = res.region_of_cell[lin];
            if (region < 0) continue;
            const CellId cell = grid.cell_at(lin);
            for (int y = sc.span.min; y <= sc.span.max; ++y) {
                w.field(cell.col).field(cell.row).field(sc.regions[static_cast<std::size_t>(region)].name).field(y);
                w.field(to_string(res.planted.at(cell, y)));
                w.end_row();
            }
        }
    }
    ctx.log << "[synth] " << res.events.records.size() << " events over " << sc.regions.size() << " region(s)\n";
}

void stage_ingest(StageContext& ctx) {
    fs::path input;
    if (ctx.cfg.events_path) {
        input = *ctx.cfg.events_path;
        ctx.manifest.inputs.push_back(input);
    } else {
        input = ctx.need(kSynthEvents, Stage::synth);
    }
    ParseOptions opt;
    opt.columns = ctx.cfg.columns;
    opt.filter = ctx.cfg.event_types;
    opt.span = span_of(ctx.cfg);
    opt.grid = grid_of(ctx.cfg);
    for (const auto& [alias, type] : ctx.cfg.extra_aliases) opt.aliases.add(alias, type);

    auto in = ctx.open_in(input);
    const auto res = parse_events(in, opt);
    {
        auto o = ctx.open_out(kEvents);
        write_events_csv(o, res.events, ctx.header());
    }
    {
        auto o = ctx.open_out(kRejects);
        write_rejects_csv(o, res.rejects, ctx.header());
    }
    ctx.log << "[ingest] rows=" << res.rows_read << " kept=" << res.events.records.size()
            << " malformed=" << res.count(RejectKind::malformed)
            << " out_of_bounds=" << res.count(RejectKind::out_of_bounds)
            << " excluded_type=" << res.count(RejectKind::excluded_type)
            << " outside_span=" << res.count(RejectKind::outside_span) << '\n';
    if (res.count(RejectKind::malformed) > 0) {
        ctx.warn(std::to_string(res.count(RejectKind::malformed)) + " malformed row(s); see rejects.csv");
    }
}

void stage_classify(StageContext& ctx) {
    auto in = ctx.open_in(ctx.need(kEvents, Stage::ingest));
    const auto events = read_events_csv(in, grid_of(ctx.cfg), span_of(ctx.cfg));
    const auto field = build_state_field(events, ctx.cfg.scdi);
    {
        auto o = ctx.open_out(kStates);
        write_states_csv(o, field, ctx.header());
    }
    {
        auto o = ctx.open_out(kStatesGeo);
        write_states_geojson(o, field, ctx.header());
    }
    ctx.log << "[classify] threshold=" << format_double(field.threshold) << " events per violent cell-year\n";
}

void stage_sequences(StageContext& ctx) {
    const auto field = load_states(ctx);
    const auto seqs = extract_sequences(field, ctx.cfg.drop_never_violent);
    if (seqs.empty()) throw Error("no violent cells: nothing to sequence");
    const auto tm = empirical_transition_matrix(seqs);
    const auto costs = ctx.cfg.indel ? substitution_costs(tm, *ctx.cfg.indel)
                                     : substitution_costs_relative(tm, ctx.cfg.indel_fraction);
    {
        auto o = ctx.open_out(kSequences);
        write_sequences_csv(o, seqs, ctx.header());
    }
    {
        auto o = ctx.open_out(kTransitions);
        auto h = ctx.header();
        h.push_back("p(row -> column), pooled over all sequences");
        write_state_matrix_csv(o, tm.probs, h);
    }
    {
        auto o = ctx.open_out(kTransitionCounts);
        write_state_matrix_csv(o, tm.counts, ctx.header());
    }
    {
        auto o = ctx.open_out(kCosts);
        write_costs_csv(o, costs, ctx.header());
    }
    ctx.log << "[sequences] " << seqs.size() << " sequences of length " << seqs.length
            << ", indel=" << format_double(costs.indel) << '\n';
}

void stage_distances(StageContext& ctx) {
    const auto seqs = load_sequences(ctx);
    CostMatrix costs;
    {
        auto in = ctx.open_in(ctx.need(kCosts, Stage::sequences));
        costs = read_costs_csv(in);
    }
    OmOptions opt;
    opt.normalize = ctx.cfg.normalize;
    const auto t0 = std::chrono::steady_clock::now();
    const auto d = pairwise_distances(seqs, costs, ctx.cfg.workers, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    {
        auto o = ctx.open_out(kDistances);
        write_distance_matrix(o, d);
    }
    if (d.size() <= ctx.cfg.distances_csv_max_n) {
        auto o = ctx.open_out(kDistancesCsv);
        write_distance_matrix_csv(o, d, ctx.header());
    }
    ctx.log << "[distances] " << d.condensed().size() << " alignments in " << secs << " s\n";
}

void stage_cluster(StageContext& ctx) {
    DistanceMatrix d;
    {
        auto in = ctx.open_in(ctx.need(kDistances, Stage::distances));
        d = read_distance_matrix(in);
    }
    const auto k = static_cast<std::size_t>(ctx.cfg.k);
    if (k > d.size()) {
        throw Error("cluster.k = " + std::to_string(k) + " exceeds the " + std::to_string(d.size()) +
                    " sequences available");
    }
    const auto dg = ward_linkage(d);
    auto assign = cut(dg, k, d.labels());
    if (ctx.cfg.drop_never_violent) assign.never_violent_label = ctx.cfg.k + 1;

    std::vector<std::string> names;
    names.reserve(d.size());
    for (const auto& c : d.labels()) names.push_back(cell_name(c));
    {
        auto o = ctx.open_out(kNewick);
        write_newick(o, dg, names);
    }
    {
        auto o = ctx.open_out(kMerges);
        write_merge_table_csv(o, dg, ctx.header());
    }
    {
        auto o = ctx.open_out(kClusters);
        write_assignment_csv(o, assign, ctx.header());
    }
    {
        auto o = ctx.open_out(kClustersGeo);
        write_assignment_geojson(o, assign, grid_of(ctx.cfg), ctx.header());
    }
    const auto sizes = assign.sizes();
    ctx.log << "[cluster] k=" << k << " sizes:";
    for (auto s : sizes) ctx.log << ' ' << s;
    ctx.log << '\n';
}

void stage_stats(StageContext& ctx) {
    const auto seqs = load_sequences(ctx);
    const auto assign = load_clusters(ctx, seqs);
    std::vector<TrajectorySummary> rows;
    rows.push_back(all_cells_summary(seqs, ctx.cfg.start_rule));
    for (int c = 1; c <= assign.k; ++c) rows.push_back(trajectory_summary(seqs, assign, c, ctx.cfg.start_rule));
    {
        auto o = ctx.open_out(kSummary);
        write_summary_csv(o, rows, ctx.header());
    }
    for (const auto& r : rows) {
        if (r.cluster == 0) continue;
        auto o = ctx.open_out(cluster_transitions_name(r.cluster));
        auto h = ctx.header();
        h.push_back("cluster=" + std::to_string(r.cluster) + " n_cells=" + std::to_string(r.n_cells));
        h.push_back("p(row -> column) within the cluster");
        write_state_matrix_csv(o, r.transitions.probs, h);
    }
    {
        auto o = ctx.open_out(kHitting);
        CsvWriter w(o);
        for (const auto& c : ctx.header()) w.comment(c);
        w.comment("expected years from a violent state to first reach NC; inf = NC not reached almost surely");
        w.row({"cluster", "state", "hitting_time", "start_weight"});
        for (const auto& r : rows) {
            for (State s : kViolentStates) {
                w.field(r.cluster).field(to_string(s)).field(r.hitting[s]);
                w.field(r.start_weights ? (*r.start_weights)[index(s)] : 0.0);
                w.end_row();
            }
        }
    }
    for (const auto& r : rows) {
        if (std::isinf(r.mvst_years)) {
            ctx.warn((r.cluster == 0 ? std::string("all cells") : "cluster " + std::to_string(r.cluster)) +
                     ": no finite stopping time under the empirical chain");
        }
    }
    ctx.log << "[stats] " << rows.size() - 1 << " cluster summaries\n";
}

void stage_joins(StageContext& ctx) {
    const auto seqs = load_sequences(ctx);
    const auto assign = load_clusters(ctx, seqs);
    std::vector<CellId> cells = assign.cells;
    std::vector<int> labels = assign.labels;
    if (ctx.cfg.include_never_violent) {
        if (!assign.never_violent_label) {
            ctx.warn("include_never_violent has no effect: never-violent cells were not dropped upstream");
        } else {
            const auto field = load_states(ctx);
            const auto& grid = field.grid();
            for (std::size_t lin = 0; lin < grid.n_cells(); ++lin) {
                const CellId c = grid.cell_at(lin);
                const auto st = field.cell_states(c);
                if (std::none_of(st.begin(), st.end(), is_violent)) {
                    cells.push_back(c);
                    labels.push_back(*assign.never_violent_label);
                }
            }
        }
    }
    const auto w = build_weights(cells, ctx.cfg.contiguity);
    const auto report = join_counts(labels, w);
    std::optional<PermutationReport> perms;
    if (ctx.cfg.permutations > 0) {
        perms = permutation_reference(labels, w, ctx.cfg.permutations, derive_seed(ctx.cfg.seed, "joins"),
                                      ctx.cfg.workers);
    }
    auto h = ctx.header();
    h.push_back(std::string("contiguity=") + (ctx.cfg.contiguity == Contiguity::rook ? "rook" : "queen") +
                " S0=" + format_double(report.S0) + " S1=" + format_double(report.S1) +
                " S2=" + format_double(report.S2));
    {
        auto o = ctx.open_out(kJoins);
        write_joins_long_csv(o, report, perms ? &*perms : nullptr, h);
    }
    {
        auto o = ctx.open_out(kJoinsMatrix);
        write_joins_matrix_csv(o, report, h);
    }
    ctx.log << "[joins] n=" << report.n << " joins=" << format_double(report.S0 / 2.0)
            << " J_tot=" << format_double(report.total.observed);
    if (report.total.z) ctx.log << " z_tot=" << format_double(*report.total.z);
    ctx.log << '\n';
}

void copy_into_report(StageContext& ctx, const fs::path& src, const std::string& name) {
    auto in = ctx.open_in(src);
    auto o = ctx.open_out(fs::path(kReportDir) / name);
    o << in.rdbuf();
}

void stage_report(StageContext& ctx) {
    const auto seqs = load_sequences(ctx);
    const auto assign = load_clusters(ctx, seqs);
    const auto field = load_states(ctx);
    const auto summary = ctx.need(kSummary, Stage::stats);
    const auto hitting = ctx.need(kHitting, Stage::stats);
    const auto transitions = ctx.need(kTransitions, Stage::sequences);
    const auto joins = ctx.need(kJoins, Stage::joins);
    const auto joins_matrix = ctx.need(kJoinsMatrix, Stage::joins);
    std::vector<fs::path> per_cluster;
    for (int c = 1; c <= assign.k; ++c) {
        const auto name = cluster_transitions_name(c);
        if (!fs::exists(ctx.out(name))) throw Error("missing artifact " + name + ": run the 'stats' stage first");
        per_cluster.push_back(ctx.out(name));
        ctx.manifest.inputs.push_back(per_cluster.back());
    }

    copy_into_report(ctx, summary, "trajectory_summary.csv");
    copy_into_report(ctx, hitting, "hitting_times.csv");
    copy_into_report(ctx, transitions, "transitions_all.csv");
    for (int c = 1; c <= assign.k; ++c) {
        copy_into_report(ctx, per_cluster[static_cast<std::size_t>(c - 1)], cluster_transitions_name(c));
    }
    copy_into_report(ctx, joins_matrix, "join_z_matrix.csv");
    copy_into_report(ctx, joins, "join_counts.csv");

    // One polygon per grid cell that ever saw violence, plus never-violent
    // cells under their own label.
    {
        auto o = ctx.open_out(fs::path(kReportDir) / "trajectories.geojson");
        auto meta = ctx.header();
        meta.push_back("k=" + std::to_string(assign.k));
        GeoJsonWriter gj(o, meta);
        const auto& grid = field.grid();
        std::unordered_map<CellId, std::size_t, CellIdHash> pos;
        for (std::size_t i = 0; i < assign.cells.size(); ++i) pos.emplace(assign.cells[i], i);
        for (std::size_t lin = 0; lin < grid.n_cells(); ++lin) {
            const CellId c = grid.cell_at(lin);
            const auto it = pos.find(c);
            std::vector<std::pair<std::string, PropertyValue>> props;
            if (it != pos.end()) {
                props.emplace_back("cluster", static_cast<long long>(assign.labels[it->second]));
                props.emplace_back("sequence", seqs.sequences[it->second].to_string());
            } else if (assign.never_violent_label) {
                props.emplace_back("cluster", static_cast<long long>(*assign.never_violent_label));
                props.emplace_back("sequence", std::string("never violent"));
            } else {
                continue;
            }
            gj.cell(grid, c, props);
        }
        gj.finish();
    }
    {
        nlohmann::ordered_json j;
        j["trajseq_version"] = ctx.manifest.version;
        j["config_hash"] = ctx.manifest.config_hash;
        j["seed"] = ctx.cfg.seed;
        j["k"] = assign.k;
        j["n_sequences"] = seqs.size();
        j["sequence_length"] = seqs.length;
        j["first_year"] = seqs.year_min;
        j["threshold_events_per_cell_year"] = field.threshold;
        auto sizes = nlohmann::ordered_json::array();
        for (auto s : assign.sizes()) sizes.push_back(s);
        j["cluster_sizes"] = sizes;
        if (assign.never_violent_label) j["never_violent_label"] = *assign.never_violent_label;
        j["files"] = {
            {"trajectory_summary.csv", "per-cluster start/repetition/cross/terminus transitions and MVST"},
            {"hitting_times.csv", "expected years to reach NC from each violent state, per cluster"},
            {"transitions_all.csv", "pooled empirical transition probabilities"},
            {"transitions_cluster_<c>.csv", "transition probabilities within each cluster"},
            {"join_z_matrix.csv", "pairwise join-count z-scores between trajectory types"},
            {"join_counts.csv", "observed/expected joins, variances, z-scores, permutation p-values"},
            {"trajectories.geojson", "grid-cell polygons with cluster label and state sequence"}};
        auto o = ctx.open_out(fs::path(kReportDir) / "index.json");
        o << j.dump(2) << '\n';
    }
    ctx.log << "[report] bundle written to " << ctx.out(kReportDir).string() << '\n';
}

}  // namespace

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::synth: return "synth";
        case Stage::ingest: return "ingest";
        case Stage::classify: return "classify";
        case Stage::sequences: return "sequences";
        case Stage::distances: return "distances";
        case Stage::cluster: return "cluster";
        case Stage::stats: return "stats";
        case Stage::joins: return "joins";
        case Stage::report: return "report";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view name) noexcept {
    for (Stage s : {Stage::synth, Stage::ingest, Stage::classify, Stage::sequences, Stage::distances,
                    Stage::cluster, Stage::stats, Stage::joins, Stage::report}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

const char* version() noexcept { return TRAJSEQ_VERSION; }

void run_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log) {
    StageContext ctx(stage, cfg, log);
    switch (stage) {
        case Stage::synth: stage_synth(ctx); break;
        case Stage::ingest: stage_ingest(ctx); break;
        case Stage::classify: stage_classify(ctx); break;
        case Stage::sequences: stage_sequences(ctx); break;
        case Stage::distances: stage_distances(ctx); break;
        case Stage::cluster: stage_cluster(ctx); break;
        case Stage::stats: stage_stats(ctx); break;
        case Stage::joins: stage_joins(ctx); break;
        case Stage::report: stage_report(ctx); break;
    }
    ctx.finish();
}

void run_all(const PipelineConfig& cfg, std::ostream& log) {
    if (cfg.scenario_path && !cfg.events_path) run_stage(Stage::synth, cfg, log);
    for (Stage s : kPipelineStages) run_stage(s, cfg, log);
}

}  // namespace trajseq::cli
