#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "trajseq/events.hpp"
#include "trajseq/grid.hpp"
#include "trajseq/state.hpp"

namespace trajseq {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Clark-Evans nearest-neighbour index: mean observed nearest-neighbour
/// distance divided by its CSR expectation 0.5 * sqrt(area / n).
/// Values below 1 indicate clustering; co-located points give 0.
/// Requires at least two points and a positive area.
double nearest_neighbor_index(std::span<const Point2> points, double cell_area);

enum class ThresholdScope {
    global,    ///< one mean over every violent cell-year of the study
    per_year,  ///< a separate mean for each year
};

/// How cell-years with a single event (no NNI) are classified.
enum class SmallCountRule {
    dispersed,
    clustered,
};

struct ScdiOptions {
    ThresholdScope scope = ThresholdScope::global;
    SmallCountRule small_count = SmallCountRule::dispersed;
    double nni_cutoff = 1.0;  ///< CLUSTERED iff nni < cutoff
};

/// Mean event count over cell-years with at least one event.
/// Throws trajseq::Error when the set has no events.
double intensity_threshold(const EventSet& events);

/// count == 0 -> NC. Otherwise HIGH iff count > threshold, CLUSTERED iff
/// nni < cutoff; a missing nni falls back to the small-count rule.
State classify_cell_year(std::size_t count, double threshold, std::optional<double> nni,
                         const ScdiOptions& options = {});

/// Dense (cell, year) lattice of states.
class StateField {
public:
    StateField() = default;
    StateField(GridSpec grid, YearSpan span);

    const GridSpec& grid() const noexcept { return grid_; }
    const YearSpan& span() const noexcept { return span_; }
    std::size_t n_years() const noexcept { return static_cast<std::size_t>(span_.length()); }

    State at(CellId cell, int year) const { return states_[offset(cell, year)]; }
    void set(CellId cell, int year, State s) { states_[offset(cell, year)] = s; }

    /// The T states of one cell, in year order.
    std::span<const State> cell_states(CellId cell) const {
        return {states_.data() + grid_.linear_index(cell) * n_years(), n_years()};
    }

    /// Global mean threshold (0 when no cell-year is violent).
    double threshold = 0.0;
    /// Threshold applied to each year; equals `threshold` in global scope.
    std::vector<double> year_thresholds;

    friend bool operator==(const StateField&, const StateField&) = default;

private:
    std::size_t offset(CellId cell, int year) const;

    GridSpec grid_;
    YearSpan span_;
    std::vector<State> states_;
};

/// Classifies every cell-year of the event set's grid and span. An empty
/// event set yields an all-NC field.
StateField build_state_field(const EventSet& events, const ScdiOptions& options = {});

/// Long format: cell_col,cell_row,year,state (every cell-year).
void write_states_csv(std::ostream& out, const StateField& field, const std::vector<std::string>& comments = {});
StateField read_states_csv(std::istream& in, const GridSpec& grid, const YearSpan& span);

/// FeatureCollection of cell polygons with one "y<year>" property per
/// year. Cells that are NC in every year are omitted.
void write_states_geojson(std::ostream& out, const StateField& field, const std::vector<std::string>& comments = {});

}  // namespace trajseq
