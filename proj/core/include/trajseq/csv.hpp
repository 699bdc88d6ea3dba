#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "trajseq/error.hpp"

namespace trajseq {

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, and newlines
/// inside quotes. Lines starting with '#' outside a record are metadata and
/// are skipped (see `comments()`).
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    /// 1-based index of the last record returned (header is record 1).
    std::size_t record_number() const noexcept { return record_; }

    const std::vector<std::string>& comments() const noexcept { return comments_; }

private:
    std::istream& in_;
    std::size_t record_ = 0;
    std::vector<std::string> comments_;
};

/// Maps header names to column positions.
class CsvHeader {
public:
    CsvHeader() = default;
    explicit CsvHeader(std::vector<std::string> names);

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t require(std::string_view name) const;
    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
};

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    /// Emits a "# ..." metadata line.
    void comment(std::string_view text);

    CsvWriter& field(std::string_view value);
    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
    CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
    void end_row();

    void row(const std::vector<std::string>& values);

private:
    std::ostream& out_;
    bool first_ = true;
};

/// Shortest text that round-trips the double. Infinities are "inf"/"-inf";
/// NaN is "nan".
std::string format_double(double value);

/// Parses a full-string decimal (leading/trailing blanks allowed).
std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<long long> parse_int(std::string_view text) noexcept;

std::string_view trim(std::string_view text) noexcept;
std::string to_lower(std::string_view text);

}  // namespace trajseq
