#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trajseq/events.hpp"
#include "trajseq/grid.hpp"
#include "trajseq/scdi.hpp"
#include "trajseq/state.hpp"

namespace trajseq {

/// Events emitted for a cell-year in a given planted state. Clustered
/// states (CL, CH) scatter points normally around a random centre with
/// standard deviation `spread * cell_size`. Dispersed states (DL, DH) put
/// one point in each of `count` distinct sub-cells of a ceil(sqrt(count))
/// lattice, jittered by up to `spread` of a sub-cell.
struct EmissionSpec {
    int count_min = 0;
    int count_max = 0;
    double spread = 0.0;
};

/// A block of cells whose sequences follow one first-order Markov chain.
struct RegionSpec {
    std::string name;
    std::int32_t col_begin = 0, row_begin = 0;  ///< inclusive
    std::int32_t col_end = 0, row_end = 0;      ///< exclusive
    StateVector<double> initial{};               ///< distribution of the first year
    StateMatrix<double> chain{};                 ///< chain[i][j] = Pr(j next | i now)

    bool contains(CellId c) const noexcept {
        return c.col >= col_begin && c.col < col_end && c.row >= row_begin && c.row < row_end;
    }
};

struct ScenarioConfig {
    GridSpec grid;
    YearSpan span;
    StateVector<EmissionSpec> emission = default_emission();
    std::vector<RegionSpec> regions;

    /// Low-intensity states emit 2-4 events, high-intensity states 40-60.
    static StateVector<EmissionSpec> default_emission();

    /// Throws trajseq::Error listing every problem found.
    void validate() const;
};

/// JSON scenario file. Schema:
///
///   {
///     "grid":   {"origin_x": 0, "origin_y": 0, "cell_size": 1, "n_cols": 30, "n_rows": 20},
///     "span":   [1997, 2024],
///     "emission": {"CH": {"count": [40, 60], "spread": 0.03}, ...},   // optional per state
///     "regions": [
///       {"name": "A", "cells": [col_begin, row_begin, col_end, row_end],
///        "initial": {"NC": 1.0},
///        "chain": {"NC": {"NC": 0.85, "CL": 0.15}, "CL": {"NC": 0.7, "CL": 0.3}, ...}}
///     ]
///   }
///
/// Chain rows left out default to moving straight to NC. Probabilities
/// must sum to 1 per row.
ScenarioConfig scenario_from_json(std::string_view json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct SyntheticResult {
    EventSet events;
    StateField planted;              ///< state drawn for every cell-year
    std::vector<int> region_of_cell; ///< per linear cell index; -1 outside every region
    std::vector<std::string> warnings;
};

/// Deterministic for a fixed (scenario, seed): chain draws for cell c use
/// the stream derive_seed(seed, "synthetic-chain", c) and its point
/// patterns derive_seed(seed, "synthetic-events", c), where c is the
/// row-major cell index. Records are ordered by cell, then year.
SyntheticResult generate_synthetic(const ScenarioConfig& scenario, std::uint64_t seed);

}  // namespace trajseq
