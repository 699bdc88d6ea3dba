#include "trajseq/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "trajseq/state.hpp"

namespace trajseq {

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    // Skip blank lines and comment lines between records.
    while (c != EOF) {
        if (c == '\r' || c == '\n') {
            c = in_.get();
            continue;
        }
        if (c == '#') {
            std::string line;
            std::getline(in_, line);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            comments_.push_back(std::move(line));
            c = in_.get();
            continue;
        }
        break;
    }
    if (c == EOF) return false;

    std::string current;
    bool quoted = false;
    bool after_quote = false;
    for (;; c = in_.get()) {
        if (quoted) {
            if (c == EOF) throw Error("unterminated quoted field in CSV record " + std::to_string(record_ + 1));
            if (c == '"') {
                if (in_.peek() == '"') {
                    current.push_back('"');
                    in_.get();
                } else {
                    quoted = false;
                    after_quote = true;
                }
            } else {
                current.push_back(static_cast<char>(c));
            }
            continue;
        }
        if (c == EOF || c == '\n') break;
        if (c == '\r') {
            if (in_.peek() == '\n') in_.get();
            break;
        }
        if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
            after_quote = false;
        } else if (c == '"' && current.empty() && !after_quote) {
            quoted = true;
        } else {
            current.push_back(static_cast<char>(c));
        }
    }
    fields.push_back(std::move(current));
    ++record_;
    return true;
}

CsvHeader::CsvHeader(std::vector<std::string> names) : names_(std::move(names)) {
    // Tolerate a UTF-8 BOM on the first column.
    if (!names_.empty() && names_[0].starts_with("\xEF\xBB\xBF")) names_[0].erase(0, 3);
}

std::optional<std::size_t> CsvHeader::find(std::string_view name) const {
    const std::string wanted = to_lower(trim(name));
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (to_lower(trim(names_[i])) == wanted) return i;
    }
    return std::nullopt;
}

std::size_t CsvHeader::require(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw Error("CSV header is missing required column '" + std::string(name) + "'");
}

void CsvWriter::comment(std::string_view text) {
    out_ << '#' << ' ' << text << '\n';
}

CsvWriter& CsvWriter::field(std::string_view value) {
    if (!first_) out_ << ',';
    first_ = false;
    const bool needs_quotes = value.find_first_of(",\"\r\n") != std::string_view::npos ||
                              (!value.empty() && value.front() == '#');
    if (!needs_quotes) {
        out_ << value;
        return *this;
    }
    out_ << '"';
    for (char ch : value) {
        if (ch == '"') out_ << '"';
        out_ << ch;
    }
    out_ << '"';
    return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(std::string_view(format_double(value))); }

CsvWriter& CsvWriter::field(long long value) { return field(std::string_view(std::to_string(value))); }

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
}

void CsvWriter::row(const std::vector<std::string>& values) {
    for (const auto& v : values) field(std::string_view(v));
    end_row();
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

std::string_view trim(std::string_view text) noexcept {
    const auto blank = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!text.empty() && blank(text.front())) text.remove_prefix(1);
    while (!text.empty() && blank(text.back())) text.remove_suffix(1);
    return text;
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> parse_double(std::string_view text) noexcept {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text == "inf" || text == "+inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<long long> parse_int(std::string_view text) noexcept {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

}  // namespace trajseq
