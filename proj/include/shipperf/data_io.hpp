#pragma once

#include <map>
#include <string>
#include <vector>

#include "shipperf/types.hpp"

namespace shipperf {

// Maps canonical field names to CSV column names. Defaults to identity
// (canonical names as headers). cargo_weight is the only optional field.
using ColumnSchema = std::map<std::string, std::string>;

ColumnSchema default_voyage_schema();

struct LoadReport {
    std::size_t loaded = 0;
    std::size_t dropped = 0;  // rows with unparsable required fields
};

// Parses, drops unparsable rows, and returns samples sorted by timestamp.
// Throws SchemaError if a required column is missing, DataError on an
// empty dataset or duplicate timestamps.
std::vector<VoyageSample> load_voyage_csv(const std::string& path,
                                          const ColumnSchema& schema,
                                          LoadReport* report = nullptr);

inline std::vector<VoyageSample> load_voyage_csv(const std::string& path,
                                                 LoadReport* report = nullptr) {
    return load_voyage_csv(path, default_voyage_schema(), report);
}

void save_voyage_csv(const std::string& path, const std::vector<VoyageSample>& samples);

// Events CSV: header "timestamp,kind"; returns the list sorted by time.
std::vector<CleaningEvent> load_events(const std::string& path);
void save_events(const std::string& path, const std::vector<CleaningEvent>& events);

// Ship config in a `key = value` text format; tables are comma-separated
// `draft:value` pairs (see README).
ShipConfig load_ship_config(const std::string& path);
void save_ship_config(const std::string& path, const ShipConfig& config);

}  // namespace shipperf
