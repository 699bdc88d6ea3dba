#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <iostream>

#include "config.hpp"
#include "pipeline.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config,-c", f.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--workers,-j", f.workers, "worker threads (0 = all cores)");
    cmd->add_option("--seed", f.seed, "master seed, overrides the config");
    cmd->add_option("--out,-o", f.out, "output directory, overrides the config");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace trajseq;

    CLI::App app{"Conflict-trajectory sequence analysis over gridded event data"};
    app.set_version_flag("--version", cli::version());
    app.require_subcommand(1);

    Flags flags;
    std::vector<std::pair<CLI::App*, std::optional<cli::Stage>>> commands;
    const std::pair<const char*, const char*> stages[] = {
        {"synth", "generate a synthetic event file from input.scenario"},
        {"ingest", "parse, filter and grid the event CSV"},
        {"classify", "assign a state to every cell-year"},
        {"sequences", "build per-cell sequences, transition rates and substitution costs"},
        {"distances", "pairwise optimal-matching distances"},
        {"cluster", "Ward clustering and the k-cluster cut"},
        {"stats", "per-cluster transition summaries and stopping times"},
        {"joins", "join-count tests between trajectory types"},
        {"report", "bundle tables, matrices and maps"},
    };
    for (const auto& [name, help] : stages) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(cmd, flags);
        commands.emplace_back(cmd, cli::parse_stage(name));
    }
    auto* run = app.add_subcommand("run", "run every stage in order");
    add_common(run, flags);
    commands.emplace_back(run, std::nullopt);

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = cli::load_config(flags.config);
        if (flags.workers) cfg.workers = *flags.workers;
        if (flags.seed) cfg.seed = *flags.seed;
        if (flags.out) cfg.output_dir = std::filesystem::absolute(*flags.out).lexically_normal();
        for (const auto& [cmd, stage] : commands) {
            if (!cmd->parsed()) continue;
            if (stage) cli::run_stage(*stage, cfg, std::cerr);
            else cli::run_all(cfg, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
