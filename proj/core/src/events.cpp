#include "trajseq/events.hpp"

#include <cmath>
#include <cstdio>

#include "trajseq/csv.hpp"
#include "trajseq/state.hpp"

namespace trajseq {

namespace {

constexpr std::array<std::string_view, 7> kEventTypeNames{
    "battle", "explosion_remote_violence", "violence_against_civilians", "riot",
    "protest", "strategic_development", "other"};

constexpr std::array<std::string_view, 12> kMonths{
    "january", "february", "march", "april", "may", "june",
    "july", "august", "september", "october", "november", "december"};

std::optional<int> parse_month_name(std::string_view text) {
    const std::string lower = to_lower(text);
    for (std::size_t i = 0; i < kMonths.size(); ++i) {
        if (lower == kMonths[i] || (lower.size() == 3 && kMonths[i].starts_with(lower))) {
            return static_cast<int>(i) + 1;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(EventType t) noexcept { return kEventTypeNames[static_cast<std::size_t>(t)]; }

std::optional<EventType> parse_event_type_name(std::string_view canonical) noexcept {
    for (std::size_t i = 0; i < kEventTypeNames.size(); ++i) {
        if (kEventTypeNames[i] == canonical) return static_cast<EventType>(i);
    }
    return std::nullopt;
}

std::set<EventType> default_event_filter() {
    return {EventType::battle, EventType::explosion_remote_violence, EventType::violence_against_civilians};
}

EventTypeAliases EventTypeAliases::acled_defaults() {
    EventTypeAliases a;
    for (std::size_t i = 0; i < kEventTypeNames.size(); ++i) a.add(kEventTypeNames[i], static_cast<EventType>(i));
    a.add("Battles", EventType::battle);
    a.add("Explosions/Remote violence", EventType::explosion_remote_violence);
    a.add("Remote violence", EventType::explosion_remote_violence);
    a.add("Violence against civilians", EventType::violence_against_civilians);
    a.add("Riots", EventType::riot);
    a.add("Riots/Protests", EventType::riot);
    a.add("Protests", EventType::protest);
    a.add("Strategic developments", EventType::strategic_development);
    return a;
}

void EventTypeAliases::add(std::string_view alias, EventType type) {
    table_[to_lower(trim(alias))] = type;
}

EventType EventTypeAliases::resolve(std::string_view raw) const {
    auto it = table_.find(to_lower(trim(raw)));
    return it == table_.end() ? EventType::other : it->second;
}

std::string_view to_string(RejectKind k) noexcept {
    switch (k) {
        case RejectKind::malformed: return "malformed";
        case RejectKind::out_of_bounds: return "out_of_bounds";
        case RejectKind::excluded_type: return "excluded_type";
        case RejectKind::outside_span: return "outside_span";
    }
    return "unknown";
}

std::size_t ParseResult::count(RejectKind k) const noexcept {
    std::size_t n = 0;
    for (const auto& r : rejects) n += r.kind == k ? 1 : 0;
    return n;
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view text) noexcept {
    using namespace std::chrono;
    text = trim(text);
    int y = 0, m = 0, d = 0;
    // ISO 8601 calendar date, optionally followed by a time part.
    if (text.size() >= 10 && text[4] == '-' && text[7] == '-') {
        auto yy = parse_int(text.substr(0, 4));
        auto mm = parse_int(text.substr(5, 2));
        auto dd = parse_int(text.substr(8, 2));
        if (!yy || !mm || !dd) return std::nullopt;
        if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
        y = static_cast<int>(*yy);
        m = static_cast<int>(*mm);
        d = static_cast<int>(*dd);
    } else {
        // "12 May 2010"
        const auto first = text.find(' ');
        const auto last = text.rfind(' ');
        if (first == std::string_view::npos || first == last) return std::nullopt;
        auto dd = parse_int(text.substr(0, first));
        auto month = parse_month_name(trim(text.substr(first + 1, last - first - 1)));
        auto yy = parse_int(text.substr(last + 1));
        if (!dd || !month || !yy) return std::nullopt;
        y = static_cast<int>(*yy);
        m = *month;
        d = static_cast<int>(*dd);
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return ymd;
}

std::string format_date(const std::chrono::year_month_day& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

ParseResult parse_events(std::istream& in, const ParseOptions& options) {
    options.grid.validate();
    if (options.filter.empty()) throw Error("event-type filter must not be empty");
    if (options.span.min > options.span.max) throw Error("year span is empty");

    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw Error("CSV input has no header row");
    const CsvHeader header(fields);
    const auto& cols = options.columns;
    const std::size_t date_col = header.require(cols.date);
    const std::size_t x_col = header.require(cols.x);
    const std::size_t y_col = header.require(cols.y);
    const std::size_t type_col = header.require(cols.event_type);
    const std::optional<std::size_t> id_col = header.find(cols.id);

    ParseResult result;
    result.events.grid = options.grid;
    result.events.span = options.span;

    auto reject = [&](RejectKind kind, std::string detail) {
        result.rejects.push_back({reader.record_number(), kind, std::move(detail)});
    };

    while (reader.next(fields)) {
        ++result.rows_read;
        const std::size_t needed = std::max({date_col, x_col, y_col, type_col}) + 1;
        if (fields.size() < needed) {
            reject(RejectKind::malformed, "expected at least " + std::to_string(needed) + " fields, found " +
                                              std::to_string(fields.size()));
            continue;
        }
        const auto date = parse_date(fields[date_col]);
        if (!date) {
            reject(RejectKind::malformed, "unparseable date '" + fields[date_col] + "'");
            continue;
        }
        const auto x = parse_double(fields[x_col]);
        const auto y = parse_double(fields[y_col]);
        if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
            reject(RejectKind::malformed,
                   "non-numeric coordinates '" + fields[x_col] + "', '" + fields[y_col] + "'");
            continue;
        }
        const EventType type = options.aliases.resolve(fields[type_col]);
        if (!options.filter.contains(type)) {
            reject(RejectKind::excluded_type, std::string(trim(fields[type_col])));
            continue;
        }
        const int year = static_cast<int>(date->year());
        if (!options.span.contains(year)) {
            reject(RejectKind::outside_span, std::to_string(year));
            continue;
        }
        const auto cell = assign_cell(*x, *y, options.grid);
        if (!cell) {
            reject(RejectKind::out_of_bounds, fields[x_col] + "," + fields[y_col]);
            continue;
        }
        EventRecord rec;
        rec.id = id_col && *id_col < fields.size() && !trim(fields[*id_col]).empty()
                     ? std::string(trim(fields[*id_col]))
                     : "row" + std::to_string(reader.record_number());
        rec.date = *date;
        rec.year = year;
        rec.x = *x;
        rec.y = *y;
        rec.type = type;
        rec.cell = *cell;
        result.events.records.push_back(std::move(rec));
    }
    return result;
}

void write_events_csv(std::ostream& out, const EventSet& events, const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.row({"id", "date", "year", "x", "y", "event_type", "cell_col", "cell_row"});
    for (const auto& r : events.records) {
        w.field(std::string_view(r.id))
            .field(std::string_view(format_date(r.date)))
            .field(r.year)
            .field(r.x)
            .field(r.y)
            .field(to_string(r.type))
            .field(r.cell.col)
            .field(r.cell.row);
        w.end_row();
    }
}

EventSet read_events_csv(std::istream& in, const GridSpec& grid, const YearSpan& span) {
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw Error("events file has no header row");
    const CsvHeader header(fields);
    const std::size_t c_id = header.require("id"), c_date = header.require("date"), c_x = header.require("x"),
                      c_y = header.require("y"), c_type = header.require("event_type");

    EventSet set;
    set.grid = grid;
    set.span = span;
    while (reader.next(fields)) {
        const auto where = " (events record " + std::to_string(reader.record_number()) + ")";
        if (fields.size() < header.names().size()) throw Error("short row" + where);
        EventRecord r;
        r.id = fields[c_id];
        auto date = parse_date(fields[c_date]);
        auto x = parse_double(fields[c_x]);
        auto y = parse_double(fields[c_y]);
        auto type = parse_event_type_name(fields[c_type]);
        if (!date || !x || !y || !type) throw Error("invalid field" + where);
        r.date = *date;
        r.year = static_cast<int>(date->year());
        r.x = *x;
        r.y = *y;
        r.type = *type;
        auto cell = assign_cell(r.x, r.y, grid);
        if (!cell) throw Error("event outside grid" + where);
        if (!span.contains(r.year)) throw Error("event outside year span" + where);
        r.cell = *cell;
        set.records.push_back(std::move(r));
    }
    return set;
}

void write_rejects_csv(std::ostream& out, const std::vector<RejectRecord>& rejects,
                       const std::vector<std::string>& comments) {
    CsvWriter w(out);
    for (const auto& c : comments) w.comment(c);
    w.row({"row", "reason", "detail"});
    for (const auto& r : rejects) {
        w.field(r.row).field(to_string(r.kind)).field(std::string_view(r.detail));
        w.end_row();
    }
}

}  // namespace trajseq
