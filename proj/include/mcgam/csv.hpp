#pragma once

#include <string>
#include <vector>

namespace mcgam {

/// RFC-4180 style CSV: comma separated, double quotes for escaping,
/// quotes doubled inside quoted fields, CRLF or LF row endings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const; // throws SchemaError
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

/// Shortest decimal form that round-trips to the same double. All
/// user-facing numeric output goes through this so reruns diff cleanly.
std::string format_double(double value);

} // namespace mcgam
