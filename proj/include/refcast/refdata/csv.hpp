#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "refcast/error.hpp"

namespace refcast::refdata::csv {

struct Row {
    std::size_t line = 0;  // 1-based physical line where the row starts
    std::vector<std::string> cells;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF, embedded newlines,
/// optional UTF-8 BOM. Blank lines are skipped. An unterminated quote throws
/// InputError.
inline std::vector<Row> read(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::string_view s = text;
    if (s.starts_with("\xEF\xBB\xBF")) s.remove_prefix(3);

    std::vector<Row> rows;
    Row row;
    std::string cell;
    bool in_quotes = false;
    bool cell_was_quoted = false;
    std::size_t line = 1;
    row.line = 1;

    auto end_row = [&] {
        row.cells.push_back(std::move(cell));
        cell.clear();
        const bool blank = row.cells.size() == 1 && row.cells[0].empty() && !cell_was_quoted;
        if (!blank) rows.push_back(std::move(row));
        row = Row{};
        cell_was_quoted = false;
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < s.size() && s[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!cell.empty()) {
                    throw InputError("malformed CSV at line " + std::to_string(line) + ": stray quote");
                }
                in_quotes = true;
                cell_was_quoted = true;
                break;
            case ',':
                row.cells.push_back(std::move(cell));
                cell.clear();
                break;
            case '\r':
                break;
            case '\n':
                end_row();
                ++line;
                row.line = line;
                break;
            default: cell.push_back(c);
        }
    }
    if (in_quotes) throw InputError("malformed CSV: unterminated quoted field starting near line " + std::to_string(row.line));
    if (!cell.empty() || !row.cells.empty() || cell_was_quoted) end_row();
    return rows;
}

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << escape(cells[i]);
    }
    os << '\n';
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw InputError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        // Accept integral floats such as "1971.0".
        const auto d = parse_double(s);
        if (d && std::floor(*d) == *d) return static_cast<long long>(*d);
        throw InputError("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

inline std::optional<bool> parse_bool(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s == "1" || s == "true" || s == "TRUE" || s == "True" || s == "yes" || s == "y") return true;
    if (s == "0" || s == "false" || s == "FALSE" || s == "False" || s == "no" || s == "n") return false;
    throw InputError("not a boolean: '" + std::string(s) + "'");
}

}  // namespace refcast::refdata::csv
