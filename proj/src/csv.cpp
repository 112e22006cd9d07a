#include "calliper/csv.hpp"

#include <cstdio>
#include <fstream>

#include "calliper/errors.hpp"

namespace calliper {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CSV file: " + path.string());
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (line.empty()) continue;
            table.header = split_csv_line(line);
            have_header = true;
            continue;
        }
        if (line.empty()) continue;
        table.rows.push_back(split_csv_line(line));
    }
    if (!have_header) throw EmptyFileError("CSV file is empty: " + path.string());
    return table;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return static_cast<int>(i);
    }
    return -1;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n'))
        --e;
    return s.substr(b, e - b);
}

namespace {

// %.*g at increasing precision until the value parses back exactly.
template <class T>
std::string shortest_repr(T v, int max_precision) {
    char buf[64];
    for (int prec = 1; prec <= max_precision; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, static_cast<double>(v));
        if (static_cast<T>(std::strtod(buf, nullptr)) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.*g", max_precision, static_cast<double>(v));
    return buf;
}

}  // namespace

std::string format_double(double v) { return shortest_repr(v, 17); }
std::string format_float(float v) { return shortest_repr(v, 9); }

}  // namespace calliper
