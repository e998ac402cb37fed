#include "shipperf/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shipperf/csv.hpp"

namespace shipperf {

namespace {

const char* kRequiredFields[] = {
    "timestamp",        "shaft_rpm",       "shaft_power",        "gps_speed",
    "log_speed",        "draft_fore",      "draft_aft",          "latitude",
    "longitude",        "heading",         "long_wind_speed",    "trans_wind_speed",
    "long_current_speed", "sig_wave_height", "rel_mean_wave_dir", "mean_wave_period"};

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return false;
    return std::isfinite(out);
}

}  // namespace

ColumnSchema default_voyage_schema() {
    ColumnSchema s;
    for (const char* f : kRequiredFields) s[f] = f;
    s["cargo_weight"] = "cargo_weight";
    return s;
}

std::vector<VoyageSample> load_voyage_csv(const std::string& path,
                                          const ColumnSchema& schema,
                                          LoadReport* report) {
    CsvTable t = read_csv(path);

    std::map<std::string, int> col;
    for (const char* f : kRequiredFields) {
        auto it = schema.find(f);
        std::string name = (it != schema.end()) ? it->second : std::string(f);
        int c = t.column(name);
        if (c < 0) throw SchemaError("missing required column: " + name);
        col[f] = c;
    }
    int cargo_col = -1;
    if (auto it = schema.find("cargo_weight"); it != schema.end())
        cargo_col = t.column(it->second);

    std::vector<VoyageSample> samples;
    std::size_t dropped = 0;
    for (const auto& row : t.rows) {
        VoyageSample v;
        bool ok = true;
        try {
            v.timestamp = parse_iso8601(row.at(static_cast<std::size_t>(col["timestamp"])));
        } catch (const std::exception&) {
            ok = false;
        }
        auto num = [&](const char* f, double& dst) {
            if (!ok) return;
            const auto& cell = row.at(static_cast<std::size_t>(col[f]));
            if (!parse_number(cell, dst)) ok = false;
        };
        num("shaft_rpm", v.shaft_rpm);
        num("shaft_power", v.shaft_power);
        num("gps_speed", v.gps_speed);
        num("log_speed", v.log_speed);
        num("draft_fore", v.draft_fore);
        num("draft_aft", v.draft_aft);
        num("latitude", v.latitude);
        num("longitude", v.longitude);
        num("heading", v.heading);
        num("long_wind_speed", v.long_wind_speed);
        num("trans_wind_speed", v.trans_wind_speed);
        num("long_current_speed", v.long_current_speed);
        num("sig_wave_height", v.sig_wave_height);
        num("rel_mean_wave_dir", v.rel_mean_wave_dir);
        num("mean_wave_period", v.mean_wave_period);
        if (ok && (v.shaft_power < 0 || v.gps_speed < 0 || v.log_speed < 0 ||
                   v.sig_wave_height < 0 || v.mean_wave_period < 0 ||
                   v.draft_fore <= 0 || v.draft_aft <= 0))
            ok = false;
        if (ok && cargo_col >= 0) {
            double w;
            const auto& cell = row.at(static_cast<std::size_t>(cargo_col));
            if (parse_number(cell, w)) v.cargo_weight = w;
            // Empty or unparsable optional cell: carried as absent.
        }
        if (ok)
            samples.push_back(v);
        else
            ++dropped;
    }
    if (samples.empty()) throw DataError("empty dataset: " + path);

    std::stable_sort(samples.begin(), samples.end(),
                     [](const VoyageSample& a, const VoyageSample& b) {
                         return a.timestamp < b.timestamp;
                     });
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].timestamp == samples[i - 1].timestamp)
            throw DataError("duplicate timestamp at row " + std::to_string(i));

    if (report) {
        report->loaded = samples.size();
        report->dropped = dropped;
    }
    return samples;
}

void save_voyage_csv(const std::string& path, const std::vector<VoyageSample>& samples) {
    CsvTable t;
    t.header = {"timestamp", "shaft_rpm", "shaft_power", "gps_speed", "log_speed",
                "draft_fore", "draft_aft", "latitude", "longitude", "heading",
                "cargo_weight", "long_wind_speed", "trans_wind_speed",
                "long_current_speed", "sig_wave_height", "rel_mean_wave_dir",
                "mean_wave_period"};
    for (const auto& v : samples) {
        std::vector<std::string> row;
        row.push_back(format_iso8601(v.timestamp));
        for (double x : {v.shaft_rpm, v.shaft_power, v.gps_speed, v.log_speed,
                         v.draft_fore, v.draft_aft, v.latitude, v.longitude, v.heading})
            row.push_back(format_double(x));
        row.push_back(v.cargo_weight ? format_double(*v.cargo_weight) : "");
        for (double x : {v.long_wind_speed, v.trans_wind_speed, v.long_current_speed,
                         v.sig_wave_height, v.rel_mean_wave_dir, v.mean_wave_period})
            row.push_back(format_double(x));
        t.rows.push_back(std::move(row));
    }
    write_csv(path, t);
}

std::vector<CleaningEvent> load_events(const std::string& path) {
    CsvTable t = read_csv(path);
    int ct = t.column("timestamp"), ck = t.column("kind");
    if (ct < 0 || ck < 0) throw SchemaError("events file needs 'timestamp' and 'kind' columns");
    std::vector<CleaningEvent> events;
    for (const auto& row : t.rows) {
        CleaningEvent e;
        e.timestamp = parse_iso8601(row.at(static_cast<std::size_t>(ct)));
        e.kind = cleaning_kind_from_string(row.at(static_cast<std::size_t>(ck)));
        events.push_back(e);
    }
    std::sort(events.begin(), events.end(),
              [](const CleaningEvent& a, const CleaningEvent& b) {
                  return a.timestamp < b.timestamp;
              });
    return events;
}

void save_events(const std::string& path, const std::vector<CleaningEvent>& events) {
    CsvTable t;
    t.header = {"timestamp", "kind"};
    for (const auto& e : events)
        t.rows.push_back({format_iso8601(e.timestamp), to_string(e.kind)});
    write_csv(path, t);
}

namespace {

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

LinearTable parse_pair_table(const std::string& text) {
    LinearTable tab;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("bad table entry: " + item);
        tab.x.push_back(std::atof(item.substr(0, colon).c_str()));
        tab.y.push_back(std::atof(item.substr(colon + 1).c_str()));
    }
    return tab;
}

}  // namespace

ShipConfig load_ship_config(const std::string& path) {
    auto kv = read_kv_file(path);
    ShipConfig c;
    auto num = [&](const char* key, double& dst) {
        if (auto it = kv.find(key); it != kv.end()) dst = std::atof(it->second.c_str());
    };
    num("service_speed", c.service_speed);
    num("ncr_rpm", c.ncr_rpm);
    num("design_speed", c.design_speed);
    num("ballast_draft", c.ballast_draft);
    num("water_density", c.water_density);
    num("air_density", c.air_density);
    num("propulsive_efficiency", c.propulsive_efficiency);
    num("wind_cx", c.wind_cx);
    num("wind_frontal_area", c.wind_frontal_area);
    num("wave_coeff", c.wave_coeff);
    if (auto it = kv.find("displacement_table"); it != kv.end())
        c.displacement_table = parse_pair_table(it->second);
    if (auto it = kv.find("wetted_surface_table"); it != kv.end()) {
        LinearTable t = parse_pair_table(it->second);
        for (std::size_t i = 0; i < t.x.size(); ++i)
            c.wetted_surface_table.push_back({t.x[i], 0.0, t.y[i]});
    }
    c.validate();
    return c;
}

void save_ship_config(const std::string& path, const ShipConfig& c) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << "service_speed = " << format_double(c.service_speed) << '\n'
        << "ncr_rpm = " << format_double(c.ncr_rpm) << '\n'
        << "design_speed = " << format_double(c.design_speed) << '\n'
        << "ballast_draft = " << format_double(c.ballast_draft) << '\n'
        << "water_density = " << format_double(c.water_density) << '\n'
        << "air_density = " << format_double(c.air_density) << '\n'
        << "propulsive_efficiency = " << format_double(c.propulsive_efficiency) << '\n'
        << "wind_cx = " << format_double(c.wind_cx) << '\n'
        << "wind_frontal_area = " << format_double(c.wind_frontal_area) << '\n'
        << "wave_coeff = " << format_double(c.wave_coeff) << '\n';
    out << "displacement_table = ";
    for (std::size_t i = 0; i < c.displacement_table.x.size(); ++i) {
        if (i) out << ',';
        out << format_double(c.displacement_table.x[i]) << ':'
            << format_double(c.displacement_table.y[i]);
    }
    out << '\n';
    out << "wetted_surface_table = ";
    for (std::size_t i = 0; i < c.wetted_surface_table.size(); ++i) {
        if (i) out << ',';
        out << format_double(c.wetted_surface_table[i].mean_draft) << ':'
            << format_double(c.wetted_surface_table[i].area);
    }
    out << '\n';
}

}  // namespace shipperf
