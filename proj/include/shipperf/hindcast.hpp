#pragma once

#include <string>
#include <vector>

#include "shipperf/types.hpp"

namespace shipperf {

struct TrackPoint {
    double time = 0.0;  // seconds since epoch
    double lat = 0.0;
    double lon = 0.0;
};

// Grid CSV of (time,lat,lon,value) quadruples; axes are inferred from the
// distinct coordinates and every (t,lat,lon) combination must be present.
HindcastGrid load_hindcast_csv(const std::string& path, const std::string& variable);

// Trilinear interpolation (bilinear in space, linear in time). Track points
// may sit up to one grid cell outside the hull (clamped); beyond that a
// DataError names the offending index.
std::vector<double> interpolate_hindcast(const HindcastGrid& grid,
                                         const std::vector<TrackPoint>& track);

// Earth-frame hindcast variables resolved into the ship frame. Positive
// longitudinal wind/current oppose the ship (head). Missing grids leave the
// corresponding sample fields untouched.
struct HindcastSet {
    const HindcastGrid* wind_east = nullptr;   // m/s, eastward air motion
    const HindcastGrid* wind_north = nullptr;  // m/s
    const HindcastGrid* current_east = nullptr;   // m/s
    const HindcastGrid* current_north = nullptr;  // m/s
    const HindcastGrid* sig_wave_height = nullptr;  // m
    const HindcastGrid* mean_wave_dir = nullptr;    // deg, direction waves come from
    const HindcastGrid* mean_wave_period = nullptr;  // s
};

void merge_hindcast(std::vector<VoyageSample>& samples, const HindcastSet& set);

}  // namespace shipperf
