#include "mcgam/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mcgam/errors.hpp"

namespace mcgam {

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw SchemaError("column not found: " + name);
}

namespace {

std::vector<std::vector<std::string>> parse_records(const std::string& text,
                                                    const std::string& origin) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    const std::size_t n = text.size();

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    while (i < n) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
        } else if (c == '"' && !field_started && field.empty()) {
            in_quotes = true;
            field_started = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            end_record();
            i += 2;
        } else if (c == '\n') {
            end_record();
            ++i;
        } else {
            field += c;
            field_started = true;
            ++i;
        }
    }
    if (in_quotes) throw ParseError(origin + ": unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

} // namespace

CsvTable parse_csv(const std::string& text, const std::string& origin) {
    std::string body = text;
    if (body.rfind("\xEF\xBB\xBF", 0) == 0) body.erase(0, 3); // UTF-8 BOM
    auto records = parse_records(body, origin);
    if (records.empty()) throw ParseError(origin + ": empty file");
    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size())
            throw ParseError(origin + ": row " + std::to_string(r) + " has " +
                             std::to_string(records[r].size()) + " fields, expected " +
                             std::to_string(table.header.size()));
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

} // namespace mcgam
