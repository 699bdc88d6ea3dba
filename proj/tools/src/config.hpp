#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trajseq/chains.hpp"
#include "trajseq/events.hpp"
#include "trajseq/grid.hpp"
#include "trajseq/scdi.hpp"
#include "trajseq/spatial.hpp"

namespace trajseq::cli {

/// Everything one pipeline run depends on. Loaded from a JSON file; see
/// README.md for the schema. Relative paths resolve against the directory
/// holding the config file.
struct PipelineConfig {
    std::filesystem::path base_dir;  ///< directory of the config file

    std::optional<std::filesystem::path> events_path;
    std::optional<std::filesystem::path> scenario_path;

    ColumnMapping columns;
    std::set<EventType> event_types = default_event_filter();
    std::vector<std::pair<std::string, EventType>> extra_aliases;
    std::optional<YearSpan> span;

    /// Either an explicit grid or a bounding box + cell size. Unset when a
    /// synthetic scenario supplies the grid.
    std::optional<GridSpec> grid;

    ScdiOptions scdi;
    bool drop_never_violent = true;

    std::optional<double> indel;  ///< absolute indel cost
    double indel_fraction = 0.5;  ///< of the largest substitution cost, when `indel` is unset
    bool normalize = false;
    std::size_t distances_csv_max_n = 500;

    int k = 0;  ///< required in the config
    StartRule start_rule = StartRule::first_violent;

    Contiguity contiguity = Contiguity::queen;
    std::size_t permutations = 999;  ///< 0 disables the permutation reference
    bool include_never_violent = false;

    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::filesystem::path output_dir = "out";

    /// Normalised JSON of every setting that can change an artifact. Worker
    /// count and output directory are left out.
    std::string canonical_json() const;
    /// Hex SHA-256 of canonical_json().
    std::string hash() const;
};

/// Parses and validates. All problems are collected and thrown together
/// as one trajseq::Error.
PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace trajseq::cli
