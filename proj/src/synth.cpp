#include "shipperf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "shipperf/csv.hpp"
#include "shipperf/preprocess.hpp"

namespace shipperf {

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(splitmix64(seed)) {}
    double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal(double sigma) {
        // Box-Muller; bit-stable across platforms.
        double u1 = std::max(uniform(), 1e-300);
        double u2 = uniform();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    std::size_t weighted_pick(const std::vector<double>& weights) {
        double total = 0;
        for (double w : weights) total += w;
        double r = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r <= 0) return i;
        }
        return weights.size() - 1;
    }
};

}  // namespace

namespace {

// Plausible handysize tables when the scenario does not carry its own.
void default_tables(ShipConfig& ship) {
    if (ship.displacement_table.x.empty())
        ship.displacement_table = {{4.0, 6.0, 9.0, 11.0},
                                   {20000.0, 30000.0, 45000.0, 52000.0}};
    if (ship.wetted_surface_table.empty())
        ship.wetted_surface_table = {{4.0, 0.0, 6000.0},
                                     {6.0, 0.0, 7000.0},
                                     {9.0, 0.0, 8200.0},
                                     {11.0, 0.0, 9000.0}};
}

}  // namespace

SynthResult generate(const SynthScenario& scenario) {
    SynthScenario sc = scenario;
    default_tables(sc.ship);
    if (sc.duration_days <= 0 || sc.sample_interval_s <= 0)
        throw ConfigError("synth: invalid duration or interval");
    if (sc.hull_penalty_rate < 0 || sc.prop_penalty_rate < 0)
        throw ConfigError("synth: penalty rates must be non-negative");
    if (sc.sailing_days_min <= 0 || sc.sailing_days_max < sc.sailing_days_min ||
        sc.port_days_min <= 0 || sc.port_days_max < sc.port_days_min)
        throw ConfigError("synth: infeasible voyage/port schedule");
    sc.ship.validate();

    Rng rng(sc.seed);
    const auto n = static_cast<std::size_t>(sc.duration_days * 86400.0 /
                                            sc.sample_interval_s);
    const double dt_h = sc.sample_interval_s / 3600.0;
    const double eta = sc.ship.propulsive_efficiency;
    const double v_serv = sc.ship.service_speed;

    std::vector<CleaningEvent> events = sc.events;
    std::sort(events.begin(), events.end(),
              [](const CleaningEvent& a, const CleaningEvent& b) {
                  return a.timestamp < b.timestamp;
              });

    SynthResult out;
    out.events = events;
    out.truth.displacement_ref = sc.ship.displacement(sc.ship.ballast_draft);
    out.truth.event_delta_power_kw.assign(events.size(), 0.0);
    const double ref_factor =
        sc.calm_coeff * std::pow(out.truth.displacement_ref, 2.0 / 3.0) *
        std::pow(v_serv, 3) / eta;

    // Voyage state machine.
    bool sailing = false;
    std::size_t phase_left = 0;  // samples remaining in the current phase
    std::size_t speed_left = 0, weather_left = 0;
    bool laden = false;
    double cruise = 0, draft = sc.ship.ballast_draft, trim = 0, heading = 0;
    double wind_long = 0, wind_trans = 0, hs = 0, wave_dir = 0, wave_period = 7,
           current_kn = 0;
    double wind_long_base = 0, wind_trans_base = 0, hs_base = 0, current_base = 0;

    double static_hull_h = 0, static_prop_h = 0;
    std::size_t next_event = 0;
    double lat = 55.0, lon = 5.0;

    UtcSeconds prev_time = sc.start_time;
    for (std::size_t i = 0; i < n; ++i) {
        UtcSeconds t = sc.start_time +
                       static_cast<UtcSeconds>(i) * sc.sample_interval_s;

        // Cleaning events in (prev_time, t] reset the accumulated static time
        // of the matching component; the removed penalty at service speed is
        // the truth for that event.
        while (next_event < events.size() && events[next_event].timestamp <= t &&
               (i == 0 || events[next_event].timestamp > prev_time)) {
            const CleaningEvent& e = events[next_event];
            double removed = 0;
            if (cleans_hull(e.kind)) {
                removed += sc.hull_penalty_rate * static_hull_h;
                static_hull_h = 0;
            }
            if (cleans_propeller(e.kind)) {
                removed += sc.prop_penalty_rate * static_prop_h;
                static_prop_h = 0;
            }
            out.truth.event_delta_power_kw[next_event] = -removed * ref_factor;
            ++next_event;
        }
        prev_time = t;

        if (phase_left == 0) {
            sailing = !sailing;
            double days = sailing ? rng.uniform(sc.sailing_days_min, sc.sailing_days_max)
                                  : rng.uniform(sc.port_days_min, sc.port_days_max);
            phase_left = std::max<std::size_t>(
                1, static_cast<std::size_t>(days * 86400.0 / sc.sample_interval_s));
            if (sailing) {
                laden = !laden;
                // Partial cargoes and bunkering spread the draft between the
                // ballast and full-load marks.
                draft = laden ? sc.laden_draft - rng.uniform(0.0, 2.0)
                              : sc.ship.ballast_draft + rng.uniform(0.0, 1.5);
                // Deeper-laden passages trim more by the stern under the
                // loading plan, plus a per-passage adjustment.
                trim = 0.05 + rng.uniform(0.0, 0.25) +
                       0.05 * (draft - sc.ship.ballast_draft);
                heading = rng.uniform(0.0, 360.0);
                speed_left = 0;    // force a fresh order at voyage start
                weather_left = 0;  // and a fresh weather system
            }
        }
        --phase_left;

        if (sailing) {
            // Speed orders change daily. Charter orders run slower on
            // deep-laden passages, and the master eases off further in a
            // seaway, so the ordered speed tracks both draft and sea state.
            if (speed_left == 0) {
                cruise = sc.cruise_speeds_kn[rng.weighted_pick(sc.cruise_speed_weights)] -
                         0.4 * (draft - (sc.ship.ballast_draft + 1.25)) -
                         0.35 * (hs_base - 1.2);
                speed_left = std::max<std::size_t>(
                    1, static_cast<std::size_t>(86400.0 / sc.sample_interval_s));
            }
            --speed_left;
            // A new weather system passes every couple of days: a wind vector
            // drawn as magnitude and bearing relative to the ship's track. The
            // crosswind channel records an unsigned athwartships magnitude, as
            // an anemometer feed would.
            if (weather_left == 0) {
                double wind_mag = 0.5 + std::abs(rng.normal(sc.wind_sigma));
                double wind_rel = rng.uniform(0.0, 360.0) * M_PI / 180.0;
                wind_long_base = wind_mag * std::cos(wind_rel);
                wind_trans_base = wind_mag * std::abs(std::sin(wind_rel));
                // Wind-driven seas on top of a light background swell: the
                // sea state tracks the strength of the local weather system.
                hs_base = 0.3 + 0.35 * wind_mag +
                          0.4 * std::abs(rng.normal(sc.wave_sigma));
                // Wind-driven surface drift (a few percent of the wind speed,
                // along its bearing) on top of an independent tidal part.
                current_base = 0.04 * wind_mag * std::cos(wind_rel) +
                               rng.normal(sc.current_sigma_kn);
                // Wind-driven seas: waves arrive roughly downwind of the
                // system, and fuller seas run at longer periods.
                wave_dir = wind_rel * 180.0 / M_PI + rng.normal(25.0);
                if (wave_dir < 0) wave_dir += 360.0;
                if (wave_dir >= 360) wave_dir -= 360.0;
                wave_period = std::clamp(
                    4.0 + 2.2 * std::sqrt(hs_base) + rng.uniform(-0.8, 0.8), 3.0,
                    12.0);
                weather_left = std::max<std::size_t>(
                    1, static_cast<std::size_t>(rng.uniform(1.5, 3.0) * 86400.0 /
                                                sc.sample_interval_s));
            }
            --weather_left;
        }

        // Slowly varying environment around the per-voyage base.
        wind_long = 0.9 * (wind_long - wind_long_base) + wind_long_base +
                    0.1 * rng.normal(sc.wind_sigma);
        wind_trans = std::max(0.0, 0.9 * (wind_trans - wind_trans_base) +
                                       wind_trans_base +
                                       0.1 * rng.normal(sc.wind_sigma));
        hs = std::max(0.0, 0.9 * (hs - hs_base) + hs_base + 0.05 * rng.normal(sc.wave_sigma));
        current_kn = 0.9 * (current_kn - current_base) + current_base +
                     0.1 * rng.normal(sc.current_sigma_kn);

        double v = sailing ? cruise : 0.0;
        double f_foul = 1.0 + sc.hull_penalty_rate * static_hull_h +
                        sc.prop_penalty_rate * static_prop_h;

        VoyageSample s;
        s.timestamp = t;
        s.draft_fore = draft - 0.5 * trim;
        s.draft_aft = draft + 0.5 * trim;
        s.latitude = lat;
        s.longitude = lon;
        s.heading = heading;
        s.long_wind_speed = sailing ? wind_long : 0.0;
        s.trans_wind_speed = sailing ? wind_trans : 0.0;
        s.sig_wave_height = sailing ? hs : 0.0;
        s.rel_mean_wave_dir = wave_dir;
        s.mean_wave_period = wave_period;
        s.long_current_speed = sailing ? -current_kn * kKnotsToMps : 0.0;
        s.log_speed = std::max(0.0, v + rng.normal(sc.speed_noise_kn));
        s.gps_speed = std::max(0.0, v + (sailing ? current_kn : 0.0) +
                                        rng.normal(sc.speed_noise_kn));
        s.cargo_weight = laden && sailing ? std::optional<double>(20000.0) : std::nullopt;

        if (sailing) {
            double disp = sc.ship.displacement(0.5 * (s.draft_fore + s.draft_aft));
            double v_mps = v * kKnotsToMps;
            double u_rel = v_mps + s.long_wind_speed;
            // Head-wind surcharge on the frontal area plus crosswind drag on
            // the (larger) lateral windage, same form as the default estimator.
            double r_wind = 0.5 * sc.ship.air_density * sc.ship.wind_cx *
                            sc.ship.wind_frontal_area *
                            (u_rel * std::abs(u_rel) - v_mps * v_mps +
                             1.5 * s.trans_wind_speed * s.trans_wind_speed);
            // Same form as the default wave estimator: head seas load more than
            // following seas and short steep seas more than long swell.
            double r_wave = sc.ship.wave_coeff * s.sig_wave_height * s.sig_wave_height *
                            (1.0 + 0.25 * std::cos(s.rel_mean_wave_dir * M_PI / 180.0)) *
                            std::sqrt(7.5 / s.mean_wave_period);
            // Sailing off the optimum trim costs a few percent of calm power.
            double trim_factor = 1.0 + 0.12 * (trim - 0.25);
            double p_calm = sc.calm_coeff * std::pow(disp, 2.0 / 3.0) *
                            std::pow(v, 3) * trim_factor * f_foul / eta;
            double p_add = (r_wind + r_wave) * v_mps / eta / 1000.0;
            s.shaft_power = std::max(0.0, p_calm + p_add + rng.normal(sc.power_noise_kw));
            // Invertible monotone rpm model in speed, weak draft dependence.
            s.shaft_rpm = sc.ship.ncr_rpm * (v / sc.ship.design_speed) *
                          (1.0 + 0.005 * (draft - sc.ship.ballast_draft));
            double step_nm = v * sc.sample_interval_s / 3600.0;
            lat += step_nm / 60.0 * std::cos(heading * M_PI / 180.0);
            lon += step_nm / 60.0 * std::sin(heading * M_PI / 180.0) /
                   std::max(0.2, std::cos(lat * M_PI / 180.0));
            lat = std::clamp(lat, -70.0, 70.0);
            if (lon > 180) lon -= 360;
            if (lon < -180) lon += 360;
        } else {
            s.shaft_power = 0.0;
            s.shaft_rpm = 0.0;
        }

        out.truth.fouling_multiplier.push_back(f_foul);
        out.truth.calm_power_at_service.push_back(ref_factor * f_foul);
        out.samples.push_back(std::move(s));

        if (v < 3.0) {
            static_hull_h += dt_h;
            static_prop_h += dt_h;
        }
    }
    return out;
}

double truth_delta_power(const SynthResult& result, const CleaningEvent& event) {
    for (std::size_t i = 0; i < result.events.size(); ++i) {
        if (result.events[i].timestamp == event.timestamp &&
            result.events[i].kind == event.kind)
            return result.truth.event_delta_power_kw[i];
    }
    throw DataError("truth_delta_power: unknown event");
}

void save_truth_json(const std::string& path, const SynthResult& result) {
    nlohmann::json j;
    j["displacement_ref"] = result.truth.displacement_ref;
    j["events"] = nlohmann::json::array();
    for (std::size_t i = 0; i < result.events.size(); ++i) {
        j["events"].push_back({{"timestamp", format_iso8601(result.events[i].timestamp)},
                               {"kind", to_string(result.events[i].kind)},
                               {"delta_power_kw", result.truth.event_delta_power_kw[i]}});
    }
    j["fouling_multiplier"] = result.truth.fouling_multiplier;
    std::ofstream out(path);
    out << j.dump(1) << '\n';
}

SynthScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    SynthScenario sc;
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
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        auto num = [&](double& dst) { dst = std::atof(val.c_str()); };
        if (key == "start_time") sc.start_time = parse_iso8601(val);
        else if (key == "duration_days") num(sc.duration_days);
        else if (key == "sample_interval_s") sc.sample_interval_s = std::atoi(val.c_str());
        else if (key == "calm_coeff") num(sc.calm_coeff);
        else if (key == "hull_penalty_rate") num(sc.hull_penalty_rate);
        else if (key == "prop_penalty_rate") num(sc.prop_penalty_rate);
        else if (key == "power_noise_kw") num(sc.power_noise_kw);
        else if (key == "speed_noise_kn") num(sc.speed_noise_kn);
        else if (key == "wind_sigma") num(sc.wind_sigma);
        else if (key == "wave_sigma") num(sc.wave_sigma);
        else if (key == "current_sigma_kn") num(sc.current_sigma_kn);
        else if (key == "laden_draft") num(sc.laden_draft);
        else if (key == "sailing_days_min") num(sc.sailing_days_min);
        else if (key == "sailing_days_max") num(sc.sailing_days_max);
        else if (key == "port_days_min") num(sc.port_days_min);
        else if (key == "port_days_max") num(sc.port_days_max);
        else if (key == "seed") sc.seed = std::strtoull(val.c_str(), nullptr, 10);
        else if (key == "events") {
            sc.events.clear();
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ',')) {
                auto colon = item.rfind(':');
                if (colon == std::string::npos)
                    throw ConfigError("bad event entry: " + item);
                CleaningEvent e;
                e.timestamp = parse_iso8601(item.substr(0, colon));
                e.kind = cleaning_kind_from_string(item.substr(colon + 1));
                sc.events.push_back(e);
            }
        } else if (key.rfind("ship.", 0) == 0) {
            std::string sk = key.substr(5);
            auto snum = [&](double& dst) { dst = std::atof(val.c_str()); };
            if (sk == "service_speed") snum(sc.ship.service_speed);
            else if (sk == "ncr_rpm") snum(sc.ship.ncr_rpm);
            else if (sk == "design_speed") snum(sc.ship.design_speed);
            else if (sk == "ballast_draft") snum(sc.ship.ballast_draft);
            else if (sk == "water_density") snum(sc.ship.water_density);
            else if (sk == "propulsive_efficiency") snum(sc.ship.propulsive_efficiency);
            else if (sk == "wind_cx") snum(sc.ship.wind_cx);
            else if (sk == "wind_frontal_area") snum(sc.ship.wind_frontal_area);
            else if (sk == "wave_coeff") snum(sc.ship.wave_coeff);
            else if (sk == "displacement_table") {
                sc.ship.displacement_table = LinearTable{};
                std::stringstream ss(val);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    auto colon = item.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("bad table entry: " + item);
                    sc.ship.displacement_table.x.push_back(
                        std::atof(item.substr(0, colon).c_str()));
                    sc.ship.displacement_table.y.push_back(
                        std::atof(item.substr(colon + 1).c_str()));
                }
            } else if (sk == "wetted_surface_table") {
                sc.ship.wetted_surface_table.clear();
                std::stringstream ss(val);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    auto colon = item.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("bad table entry: " + item);
                    sc.ship.wetted_surface_table.push_back(
                        {std::atof(item.substr(0, colon).c_str()), 0.0,
                         std::atof(item.substr(colon + 1).c_str())});
                }
            }
        }
    }
    default_tables(sc.ship);
    return sc;
}

}  // namespace shipperf
