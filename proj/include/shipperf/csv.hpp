#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace shipperf {

// Minimal CSV with a declared header row. No quoting: the formats handled
// here never embed commas in fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name, -1 if absent.
    int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

std::vector<std::string> split_csv_line(const std::string& line);

// Round-trippable double formatting (shortest exact representation).
std::string format_double(double v);

}  // namespace shipperf
