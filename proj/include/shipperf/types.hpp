#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shipperf/time_utils.hpp"

namespace shipperf {

// One 15-minute-averaged onboard record, already merged with hindcast
// environment data. Drafts are assumed corrected upstream (no draft/trim
// sensor correction is applied here). Wind and current components are in
// the ship frame; positive longitudinal values oppose the ship (head).
struct VoyageSample {
    UtcSeconds timestamp = 0;
    double shaft_rpm = 0.0;        // rev/min
    double shaft_power = 0.0;      // kW
    double gps_speed = 0.0;        // knots, over ground
    double log_speed = 0.0;        // knots, through water
    double draft_fore = 0.0;       // m
    double draft_aft = 0.0;        // m
    double latitude = 0.0;         // deg
    double longitude = 0.0;        // deg
    double heading = 0.0;          // deg
    std::optional<double> cargo_weight;  // t
    double long_wind_speed = 0.0;     // m/s, +ve head
    double trans_wind_speed = 0.0;    // m/s
    double long_current_speed = 0.0;  // m/s, +ve opposing
    double sig_wave_height = 0.0;     // m
    double rel_mean_wave_dir = 0.0;   // deg in [0,360)
    double mean_wave_period = 0.0;    // s

    double mean_draft() const { return 0.5 * (draft_fore + draft_aft); }
    double trim_by_aft() const { return draft_aft - draft_fore; }
};

enum class CleaningKind { Propeller, Hull, HullAndPropeller };

std::string to_string(CleaningKind k);
CleaningKind cleaning_kind_from_string(const std::string& s);

inline bool cleans_hull(CleaningKind k) {
    return k == CleaningKind::Hull || k == CleaningKind::HullAndPropeller;
}
inline bool cleans_propeller(CleaningKind k) {
    return k == CleaningKind::Propeller || k == CleaningKind::HullAndPropeller;
}

struct CleaningEvent {
    UtcSeconds timestamp = 0;
    CleaningKind kind = CleaningKind::Propeller;
};

// (x, y) lookup table, linear interpolation, clamped at the ends.
struct LinearTable {
    std::vector<double> x;
    std::vector<double> y;

    double operator()(double xq) const;
    bool covers(double xq) const {
        return !x.empty() && xq >= x.front() && xq <= x.back();
    }
};

// Wetted surface entries; trim is carried but S is interpolated on mean
// draft only (trim sensitivity of WSA is second order for these hulls).
struct WettedSurfaceEntry {
    double mean_draft = 0.0;  // m
    double trim = 0.0;        // m
    double area = 0.0;        // m^2
};

struct ShipConfig {
    double service_speed = 15.5;  // knots
    double ncr_rpm = 90.0;        // rev/min
    double design_speed = 15.5;   // knots
    double ballast_draft = 6.0;   // m
    double water_density = 1025.0;  // kg/m^3
    double air_density = 1.225;     // kg/m^3
    double propulsive_efficiency = 0.7;  // eta_T in (0,1]
    std::vector<WettedSurfaceEntry> wetted_surface_table;
    LinearTable displacement_table;  // mean draft [m] -> displacement [t]

    // Default added-resistance estimator coefficients.
    double wind_cx = 0.8;           // drag coefficient
    double wind_frontal_area = 500.0;  // m^2
    double wave_coeff = 4000.0;     // N per m^2 of Hs^2

    double wetted_surface(double mean_draft, double trim) const;
    double displacement(double mean_draft) const;
    void validate() const;
};

// (time, lat, lon) -> value grid with sorted axes; trilinear interpolation.
struct HindcastGrid {
    std::string variable;
    std::vector<double> times;  // seconds since epoch, ascending
    std::vector<double> lats;   // ascending
    std::vector<double> lons;   // ascending
    std::vector<double> values;  // [t][lat][lon] row-major

    double& at(std::size_t it, std::size_t ila, std::size_t ilo) {
        return values[(it * lats.size() + ila) * lons.size() + ilo];
    }
    double at(std::size_t it, std::size_t ila, std::size_t ilo) const {
        return values[(it * lats.size() + ila) * lons.size() + ilo];
    }
    void validate() const;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace shipperf
