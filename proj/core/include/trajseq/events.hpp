#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "trajseq/grid.hpp"

namespace trajseq {

enum class EventType {
    battle,
    explosion_remote_violence,
    violence_against_civilians,
    riot,
    protest,
    strategic_development,
    other,
};

std::string_view to_string(EventType t) noexcept;
std::optional<EventType> parse_event_type_name(std::string_view canonical) noexcept;

/// The three violent ACLED event types.
std::set<EventType> default_event_filter();

/// Case-insensitive map from raw event_type strings to EventType. Unknown
/// strings resolve to EventType::other.
class EventTypeAliases {
public:
    /// ACLED spellings plus the canonical enum names.
    static EventTypeAliases acled_defaults();

    void add(std::string_view alias, EventType type);
    EventType resolve(std::string_view raw) const;

private:
    std::map<std::string, EventType, std::less<>> table_;
};

struct ColumnMapping {
    std::string id = "event_id_cnty";  ///< optional; row number is used if absent
    std::string date = "event_date";
    std::string x = "longitude";
    std::string y = "latitude";
    std::string event_type = "event_type";
};

struct YearSpan {
    int min = 1997;
    int max = 2024;

    int length() const noexcept { return max - min + 1; }
    bool contains(int y) const noexcept { return y >= min && y <= max; }
    friend bool operator==(const YearSpan&, const YearSpan&) = default;
};

struct EventRecord {
    std::string id;
    std::chrono::year_month_day date;
    int year = 0;
    double x = 0.0;  ///< longitude or projected easting
    double y = 0.0;  ///< latitude or projected northing
    EventType type = EventType::other;
    CellId cell;
};

/// Filtered events. Records keep input order; every record lies in the
/// span and carries its grid cell.
struct EventSet {
    std::vector<EventRecord> records;
    GridSpec grid;
    YearSpan span;
};

enum class RejectKind {
    malformed,          ///< missing field, bad date or non-numeric coordinate
    out_of_bounds,      ///< coordinates outside the grid
    excluded_type,      ///< event type not in the filter
    outside_span,       ///< year outside [min, max]
};

std::string_view to_string(RejectKind k) noexcept;

struct RejectRecord {
    std::size_t row = 0;  ///< 1-based CSV record number; the header is record 1
    RejectKind kind = RejectKind::malformed;
    std::string detail;
};

struct ParseOptions {
    ColumnMapping columns;
    std::set<EventType> filter = default_event_filter();
    YearSpan span;
    GridSpec grid;
    EventTypeAliases aliases = EventTypeAliases::acled_defaults();
};

struct ParseResult {
    EventSet events;
    std::vector<RejectRecord> rejects;
    std::size_t rows_read = 0;

    std::size_t count(RejectKind k) const noexcept;
};

/// Single-pass CSV ingest. Every data row ends up either in
/// `events.records` or in `rejects`, so records + rejects == rows_read.
/// Throws trajseq::Error if the header is missing or lacks a required column.
ParseResult parse_events(std::istream& in, const ParseOptions& options);

/// Parses "YYYY-MM-DD" or ACLED's "DD Month YYYY".
std::optional<std::chrono::year_month_day> parse_date(std::string_view text) noexcept;
std::string format_date(const std::chrono::year_month_day& d);

/// Retained-events artifact: id,date,year,x,y,event_type,cell_col,cell_row.
void write_events_csv(std::ostream& out, const EventSet& events, const std::vector<std::string>& comments = {});
EventSet read_events_csv(std::istream& in, const GridSpec& grid, const YearSpan& span);

void write_rejects_csv(std::ostream& out, const std::vector<RejectRecord>& rejects,
                       const std::vector<std::string>& comments = {});

}  // namespace trajseq
