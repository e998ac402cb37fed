#include "shipperf/hindcast.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "shipperf/csv.hpp"

namespace shipperf {

HindcastGrid load_hindcast_csv(const std::string& path, const std::string& variable) {
    CsvTable t = read_csv(path);
    int ct = t.column("time"), cla = t.column("lat"), clo = t.column("lon"),
        cv = t.column("value");
    if (ct < 0 || cla < 0 || clo < 0 || cv < 0)
        throw SchemaError("hindcast file needs time,lat,lon,value columns");

    std::set<double> times, lats, lons;
    struct Entry { double t, la, lo, v; };
    std::vector<Entry> entries;
    for (const auto& row : t.rows) {
        Entry e;
        const std::string& ts = row.at(static_cast<std::size_t>(ct));
        // Accept either ISO-8601 or raw epoch seconds.
        if (ts.find('-') != std::string::npos && ts.find('T') != std::string::npos)
            e.t = static_cast<double>(parse_iso8601(ts));
        else
            e.t = std::atof(ts.c_str());
        e.la = std::atof(row.at(static_cast<std::size_t>(cla)).c_str());
        e.lo = std::atof(row.at(static_cast<std::size_t>(clo)).c_str());
        e.v = std::atof(row.at(static_cast<std::size_t>(cv)).c_str());
        times.insert(e.t);
        lats.insert(e.la);
        lons.insert(e.lo);
        entries.push_back(e);
    }

    HindcastGrid g;
    g.variable = variable;
    g.times.assign(times.begin(), times.end());
    g.lats.assign(lats.begin(), lats.end());
    g.lons.assign(lons.begin(), lons.end());
    g.values.assign(g.times.size() * g.lats.size() * g.lons.size(),
                    std::nan(""));
    auto index_of = [](const std::vector<double>& ax, double v) {
        return static_cast<std::size_t>(
            std::lower_bound(ax.begin(), ax.end(), v) - ax.begin());
    };
    for (const auto& e : entries) {
        std::size_t it = index_of(g.times, e.t);
        std::size_t ila = index_of(g.lats, e.la);
        std::size_t ilo = index_of(g.lons, e.lo);
        if (!std::isnan(g.at(it, ila, ilo)))
            throw DataError("duplicate hindcast coordinate in " + path);
        g.at(it, ila, ilo) = e.v;
    }
    for (double v : g.values)
        if (std::isnan(v)) throw DataError("hindcast grid " + path + " is not dense");
    g.validate();
    return g;
}

namespace {

// Bracketing cell index and weight for a query on a sorted axis, allowing
// at most one cell of extrapolation (clamped to the boundary value).
bool axis_locate(const std::vector<double>& ax, double q, std::size_t& i0, double& w) {
    if (ax.size() == 1) {
        i0 = 0;
        w = 0.0;
        double cell = 1.0;
        return std::abs(q - ax[0]) <= cell;
    }
    double first_cell = ax[1] - ax[0];
    double last_cell = ax[ax.size() - 1] - ax[ax.size() - 2];
    if (q < ax.front() - first_cell || q > ax.back() + last_cell) return false;
    if (q <= ax.front()) {
        i0 = 0;
        w = 0.0;
        return true;
    }
    if (q >= ax.back()) {
        i0 = ax.size() - 2;
        w = 1.0;
        return true;
    }
    auto it = std::upper_bound(ax.begin(), ax.end(), q);
    i0 = static_cast<std::size_t>(it - ax.begin()) - 1;
    w = (q - ax[i0]) / (ax[i0 + 1] - ax[i0]);
    return true;
}

}  // namespace

std::vector<double> interpolate_hindcast(const HindcastGrid& grid,
                                         const std::vector<TrackPoint>& track) {
    grid.validate();
    std::vector<double> out(track.size());
    std::ptrdiff_t bad = -1;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(track.size()); ++k) {
        const TrackPoint& p = track[static_cast<std::size_t>(k)];
        std::size_t it, ila, ilo;
        double wt, wla, wlo;
        if (!axis_locate(grid.times, p.time, it, wt) ||
            !axis_locate(grid.lats, p.lat, ila, wla) ||
            !axis_locate(grid.lons, p.lon, ilo, wlo)) {
#pragma omp critical
            if (bad < 0 || k < bad) bad = k;
            continue;
        }
        std::size_t it1 = std::min(it + 1, grid.times.size() - 1);
        std::size_t ila1 = std::min(ila + 1, grid.lats.size() - 1);
        std::size_t ilo1 = std::min(ilo + 1, grid.lons.size() - 1);
        double v = 0.0;
        for (int dt = 0; dt < 2; ++dt)
            for (int dla = 0; dla < 2; ++dla)
                for (int dlo = 0; dlo < 2; ++dlo) {
                    double w = (dt ? wt : 1 - wt) * (dla ? wla : 1 - wla) *
                               (dlo ? wlo : 1 - wlo);
                    v += w * grid.at(dt ? it1 : it, dla ? ila1 : ila, dlo ? ilo1 : ilo);
                }
        out[static_cast<std::size_t>(k)] = v;
    }
    if (bad >= 0)
        throw DataError("track point " + std::to_string(bad) + " outside hindcast grid");
    return out;
}

void merge_hindcast(std::vector<VoyageSample>& samples, const HindcastSet& set) {
    std::vector<TrackPoint> track;
    track.reserve(samples.size());
    for (const auto& s : samples)
        track.push_back({static_cast<double>(s.timestamp), s.latitude, s.longitude});

    auto interp = [&](const HindcastGrid* g) {
        return g ? interpolate_hindcast(*g, track) : std::vector<double>();
    };
    auto we = interp(set.wind_east), wn = interp(set.wind_north);
    auto ce = interp(set.current_east), cn = interp(set.current_north);
    auto hs = interp(set.sig_wave_height), wd = interp(set.mean_wave_dir);
    auto wp = interp(set.mean_wave_period);

    constexpr double kDeg = M_PI / 180.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        VoyageSample& s = samples[i];
        double sh = std::sin(s.heading * kDeg), ch = std::cos(s.heading * kDeg);
        if (!we.empty() && !wn.empty()) {
            // Along-heading component of air motion; head wind is opposing.
            double along = we[i] * sh + wn[i] * ch;
            double across = we[i] * ch - wn[i] * sh;
            s.long_wind_speed = -along;
            s.trans_wind_speed = across;
        }
        if (!ce.empty() && !cn.empty()) {
            double along = ce[i] * sh + cn[i] * ch;
            s.long_current_speed = -along;
        }
        if (!hs.empty()) s.sig_wave_height = hs[i];
        if (!wd.empty()) {
            double rel = std::fmod(wd[i] - s.heading, 360.0);
            if (rel < 0) rel += 360.0;
            s.rel_mean_wave_dir = rel;
        }
        if (!wp.empty()) s.mean_wave_period = wp[i];
    }
}

}  // namespace shipperf
