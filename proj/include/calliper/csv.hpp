#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace calliper {

// Minimal RFC-4180 CSV: comma-delimited, optional double-quoted fields with
// "" escapes, CRLF tolerated.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line);

// Reads header + rows; throws EmptyFileError when the file has no header.
CsvTable read_csv(const std::filesystem::path& path);

std::string csv_escape(const std::string& field);

// Column index by header name; -1 if absent.
int find_column(const std::vector<std::string>& header, const std::string& name);

std::string trim(const std::string& s);

// Shortest decimal that round-trips the value exactly. Used for every
// numeric field this project writes, so reruns are byte-identical.
std::string format_double(double v);
std::string format_float(float v);

}  // namespace calliper
