#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string_view>

#include "config.hpp"

namespace trajseq::cli {

enum class Stage { synth, ingest, classify, sequences, distances, cluster, stats, joins, report };

inline constexpr std::array kPipelineStages{Stage::ingest,    Stage::classify, Stage::sequences,
                                            Stage::distances, Stage::cluster,  Stage::stats,
                                            Stage::joins,     Stage::report};

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view name) noexcept;

const char* version() noexcept;

/// Runs one stage. Inputs are read from cfg.output_dir (or the configured
/// input files); a missing upstream artifact raises an error naming the
/// stage that produces it. Progress goes to `log`.
void run_stage(Stage stage, const PipelineConfig& cfg, std::ostream& log);

/// synth (when the config names a scenario and no events file) followed by
/// every pipeline stage, handing off through the same files.
void run_all(const PipelineConfig& cfg, std::ostream& log);

}  // namespace trajseq::cli
