#pragma once

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gaze_events/errors.hpp"

namespace gaze::csv {

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

inline std::optional<double> parse_cell(const std::string& cell, std::size_t line_no,
                                        const std::string& column) {
    if (cell.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
        throw FormatError("line " + std::to_string(line_no) + ": non-numeric value '" +
                          cell + "' in column " + column);
    return v;
}

/// Shortest representation that round-trips a double exactly.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // try a shorter form first; keep it only if it parses back bit-identical
    char shortbuf[40];
    std::snprintf(shortbuf, sizeof(shortbuf), "%.15g", v);
    if (std::strtod(shortbuf, nullptr) == v) return shortbuf;
    return buf;
}

inline std::string fmt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string{};
}

} // namespace gaze::csv
