#include "shipperf/fouling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shipperf/csv.hpp"

namespace shipperf {

ResistanceEstimators default_estimators(const ShipConfig& config) {
    ResistanceEstimators est;
    est.wind = [config](const VoyageSample& s) {
        double v = s.log_speed * kKnotsToMps;
        double u_rel = v + s.long_wind_speed;  // head wind adds to relative flow
        // Added resistance over the still-air term, plus crosswind drag on the
        // lateral windage (larger than the frontal area, hence the factor).
        return 0.5 * config.air_density * config.wind_cx * config.wind_frontal_area *
               (u_rel * std::abs(u_rel) - v * v +
                1.5 * s.trans_wind_speed * s.trans_wind_speed);
    };
    est.wave = [config](const VoyageSample& s) {
        // Heading factor: head seas add more resistance than following seas.
        // Period factor: short steep seas load more than long swell; records
        // without a period carry no period adjustment.
        double heading = 1.0 + 0.25 * std::cos(s.rel_mean_wave_dir * M_PI / 180.0);
        double period =
            s.mean_wave_period > 0 ? std::sqrt(7.5 / s.mean_wave_period) : 1.0;
        return config.wave_coeff * s.sig_wave_height * s.sig_wave_height * heading *
               period;
    };
    est.others = [](const VoyageSample&) { return 0.0; };
    return est;
}

std::vector<bool> near_calm_filter(const std::vector<VoyageSample>& samples) {
    std::vector<bool> mask(samples.size(), false);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const VoyageSample& s = samples[i];
        double wind = std::hypot(s.long_wind_speed, s.trans_wind_speed);
        mask[i] = wind < 5.5 && s.sig_wave_height < 1.0;
    }
    return mask;
}

double correct_power_near_calm(const VoyageSample& sample, const ShipConfig& config,
                               const ResistanceEstimators& est, bool* floored) {
    if (config.propulsive_efficiency <= 0)
        throw ConfigError("propulsive efficiency must be positive");
    double r = est.wind(sample) + est.wave(sample);  // N
    double v = sample.log_speed * kKnotsToMps;       // m/s
    double correction_kw = r * v / config.propulsive_efficiency / 1000.0;
    double corrected = sample.shaft_power - correction_kw;
    double floor = 0.05 * sample.shaft_power;
    if (floored) *floored = false;
    if (corrected < floor) {
        corrected = floor;
        if (floored) *floored = true;
    }
    return corrected;
}

double AdmiraltyModel::coefficient(double displacement_t, double speed_kn,
                                  double power_kw) const {
    return std::pow(displacement_t, m_exp) * std::pow(speed_kn, n_exp) / power_kw;
}

AdmiraltyModel fit_admiralty_exponents(const std::vector<VoyageSample>& samples,
                                       const std::vector<bool>& near_calm_mask,
                                       const ShipConfig& config,
                                       const ResistanceEstimators& est,
                                       const AdmiraltyFitOptions& opts) {
    std::vector<double> log_disp, log_speed, log_power;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!near_calm_mask[i]) continue;
        const VoyageSample& s = samples[i];
        if (s.log_speed <= opts.min_speed_kn) continue;
        double p = correct_power_near_calm(s, config, est);
        if (p <= 0) continue;
        double disp = config.displacement(s.mean_draft());
        if (disp <= 0) continue;
        log_disp.push_back(std::log(disp));
        log_speed.push_back(std::log(s.log_speed));
        log_power.push_back(std::log(p));
    }
    const std::size_t m = log_power.size();
    if (m < opts.min_samples)
        throw DataError("admiralty fit needs at least " +
                        std::to_string(opts.min_samples) + " near-calm samples, got " +
                        std::to_string(m));

    auto variance = [m](const std::vector<double>& v) {
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(m);
        double var = 0;
        for (double x : v) var += (x - mean) * (x - mean);
        return var / static_cast<double>(m);
    };
    if (variance(log_disp) < 1e-16)
        throw DataError(
            "admiralty fit: constant displacement; fix the displacement "
            "exponent to a configured default instead");
    if (variance(log_speed) < 1e-16)
        throw DataError("admiralty fit: single-speed dataset is rank deficient");

    Matrix A(m, 3);
    Vector y(m);
    for (std::size_t i = 0; i < m; ++i) {
        A(static_cast<Eigen::Index>(i), 0) = log_disp[i];
        A(static_cast<Eigen::Index>(i), 1) = log_speed[i];
        A(static_cast<Eigen::Index>(i), 2) = 1.0;
        y[static_cast<Eigen::Index>(i)] = log_power[i];
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    if (qr.rank() < 3) throw DataError("admiralty fit: ill-conditioned design");
    Vector coef = qr.solve(y);

    AdmiraltyModel model;
    model.m_exp = coef[0];
    model.n_exp = coef[1];
    model.log_const = coef[2];
    model.samples_used = m;
    Vector resid = y - A * coef;
    double sst = (y.array() - y.mean()).square().sum();
    model.r2 = sst > 0 ? 1.0 - resid.squaredNorm() / sst : std::nan("");
    model.residual_std = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
    return model;
}

namespace {

double sample_duration_hours(const std::vector<VoyageSample>& samples, std::size_t i) {
    if (i + 1 < samples.size())
        return seconds_to_hours(
            static_cast<double>(samples[i + 1].timestamp - samples[i].timestamp));
    return 0.25;  // nominal 15-minute record
}

}  // namespace

VoyageSeries voyage_admiralty_series(const std::vector<VoyageSample>& samples,
                                     const AdmiraltyModel& admiralty,
                                     const std::vector<bool>& valid_mask,
                                     const ShipConfig& config,
                                     const ResistanceEstimators& est,
                                     const VoyageSeriesOptions& opts) {
    VoyageSeries out;
    if (samples.empty()) return out;

    // Static stretches of at least min_port_gap_hours delimit voyages.
    std::vector<bool> is_static(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        is_static[i] = samples[i].gps_speed < opts.static_speed_threshold_kn;

    std::vector<bool> in_port(samples.size(), false);
    std::size_t i = 0;
    while (i < samples.size()) {
        if (!is_static[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double hours = 0;
        while (j < samples.size() && is_static[j]) {
            hours += sample_duration_hours(samples, j);
            ++j;
        }
        if (hours >= opts.min_port_gap_hours)
            for (std::size_t t = i; t < j; ++t) in_port[t] = true;
        i = j;
    }

    double static_hours = 0;
    std::size_t voy_begin = std::string::npos;
    double voy_start_static = 0;
    double ac_sum = 0;
    std::size_t ac_count = 0;
    UtcSeconds voy_start_time = 0;

    auto flush_voyage = [&](std::size_t end_index) {
        if (voy_begin == std::string::npos) return;
        if (ac_count >= opts.min_samples_per_voyage) {
            VoyagePoint p;
            p.cumulative_static_hours = voy_start_static;
            p.mean_admiralty = ac_sum / static_cast<double>(ac_count);
            p.start = voy_start_time;
            p.end = samples[end_index].timestamp;
            p.samples = ac_count;
            out.points.push_back(p);
        } else {
            ++out.skipped_voyages;
        }
        voy_begin = std::string::npos;
        ac_sum = 0;
        ac_count = 0;
    };

    for (std::size_t s = 0; s < samples.size(); ++s) {
        if (in_port[s]) {
            flush_voyage(s == 0 ? 0 : s - 1);
        } else if (voy_begin == std::string::npos) {
            voy_begin = s;
            voy_start_static = static_hours;
            voy_start_time = samples[s].timestamp;
        }
        if (!in_port[s] && valid_mask[s] && !is_static[s]) {
            const VoyageSample& smp = samples[s];
            double p = correct_power_near_calm(smp, config, est);
            if (p > 0) {
                double disp = config.displacement(smp.mean_draft());
                ac_sum += admiralty.coefficient(disp, smp.log_speed, p);
                ++ac_count;
            }
        }
        if (is_static[s]) static_hours += sample_duration_hours(samples, s);
    }
    flush_voyage(samples.size() - 1);
    return out;
}

std::vector<LegTrend> fit_leg_trends(const VoyageSeries& series,
                                     const std::vector<CleaningEvent>& events) {
    const std::size_t legs = events.size() + 1;
    std::vector<LegTrend> trends(legs);

    auto leg_of = [&](UtcSeconds t) {
        std::size_t leg = 0;
        for (const auto& e : events)
            if (t >= e.timestamp) ++leg;
        return leg;
    };

    std::vector<std::vector<const VoyagePoint*>> by_leg(legs);
    for (const auto& p : series.points) by_leg[leg_of(p.start)].push_back(&p);

    for (std::size_t l = 0; l < legs; ++l) {
        LegTrend& t = trends[l];
        t.points = by_leg[l].size();
        if (t.points < 2) {
            t.replaced = true;
            continue;
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        double n = static_cast<double>(t.points);
        for (const VoyagePoint* p : by_leg[l]) {
            sx += p->cumulative_static_hours;
            sy += p->mean_admiralty;
            sxx += p->cumulative_static_hours * p->cumulative_static_hours;
            sxy += p->cumulative_static_hours * p->mean_admiralty;
        }
        double denom = n * sxx - sx * sx;
        if (std::abs(denom) < 1e-12) {
            t.replaced = true;
            continue;
        }
        t.slope = (n * sxy - sx * sy) / denom;
        double intercept = (sy - t.slope * sx) / n;
        double x0 = by_leg[l].front()->cumulative_static_hours;
        t.start_value = intercept + t.slope * x0;
        if (t.slope < 0 && t.start_value > 0)
            t.fgr = -t.slope / t.start_value;
        else
            t.replaced = true;  // "improving" performance between cleanings
    }

    double min_positive = std::numeric_limits<double>::infinity();
    for (const auto& t : trends)
        if (!t.replaced && t.fgr > 0) min_positive = std::min(min_positive, t.fgr);
    if (!std::isfinite(min_positive))
        throw ModelError(
            "no leg yields a positive fouling growth rate; supply a default");
    for (auto& t : trends)
        if (t.replaced) t.fgr = min_positive;
    return trends;
}

FoulingSeries compute_fgf(const std::vector<VoyageSample>& samples,
                          const std::vector<CleaningEvent>& events,
                          const std::vector<double>& fgr_per_leg,
                          double static_speed_threshold_kn) {
    if (fgr_per_leg.size() != events.size() + 1)
        throw ModelError("compute_fgf: need one growth rate per leg");

    FoulingSeries out;
    out.events = events;
    out.fgr_per_leg = fgr_per_leg;
    out.timestamps.reserve(samples.size());
    out.hull_fgf.reserve(samples.size());
    out.prop_fgf.reserve(samples.size());
    out.total_fgf.reserve(samples.size());

    double hull = 0, prop = 0;
    std::size_t leg = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0) {
            // Accumulate over (t[i-1], t[i]] at the previous sample's state.
            const VoyageSample& prev = samples[i - 1];
            if (prev.gps_speed < static_speed_threshold_kn) {
                double dt_h = seconds_to_hours(
                    static_cast<double>(samples[i].timestamp - prev.timestamp));
                double rate = fgr_per_leg[leg];
                hull += dt_h * rate;
                prop += dt_h * rate;
            }
            // Events falling in (t[i-1], t[i]] reset at this sample.
            for (const auto& e : events) {
                if (e.timestamp > prev.timestamp && e.timestamp <= samples[i].timestamp) {
                    if (cleans_hull(e.kind)) hull = 0;
                    if (cleans_propeller(e.kind)) prop = 0;
                }
            }
            while (leg < events.size() &&
                   samples[i].timestamp >= events[leg].timestamp)
                ++leg;
        }
        out.timestamps.push_back(samples[i].timestamp);
        out.hull_fgf.push_back(hull);
        out.prop_fgf.push_back(prop);
        out.total_fgf.push_back(hull + prop);
    }
    return out;
}

namespace {

std::size_t index_at_or_before(const std::vector<UtcSeconds>& ts, UtcSeconds t) {
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) throw DataError("instant before fouling series coverage");
    return static_cast<std::size_t>(it - ts.begin()) - 1;
}

}  // namespace

double FoulingSeries::total_at(UtcSeconds t) const {
    return total_fgf[index_at_or_before(timestamps, t)];
}
double FoulingSeries::hull_at(UtcSeconds t) const {
    return hull_fgf[index_at_or_before(timestamps, t)];
}
double FoulingSeries::prop_at(UtcSeconds t) const {
    return prop_fgf[index_at_or_before(timestamps, t)];
}

DeltaCfSample delta_cf(const VoyageSample& sample, const ShipConfig& config,
                       const ResistanceEstimators& est, const CalmResistanceFn& calm) {
    double v = sample.log_speed * kKnotsToMps;
    if (v <= 0) throw DataError("delta_cf: non-positive speed");

    DeltaCfSample out;
    out.timestamp = sample.timestamp;
    double md = sample.mean_draft();
    const auto& tab = config.wetted_surface_table;
    if (!tab.empty() &&
        (md < tab.front().mean_draft || md > tab.back().mean_draft))
        out.extrapolated_surface = true;
    double s_area = config.wetted_surface(md, sample.trim_by_aft());

    double q = 0.5 * config.water_density * s_area;  // kg/m
    out.c_t_data = sample.shaft_power * 1000.0 * config.propulsive_efficiency /
                   (q * v * v * v);
    out.r_calm = calm ? calm(sample) : 0.0;
    out.r_wind = est.wind(sample);
    out.r_wave = est.wave(sample);
    out.r_others = est.others ? est.others(sample) : 0.0;
    out.c_t_emp = (out.r_calm + out.r_wind + out.r_wave + out.r_others) / (q * v * v);
    out.delta_cf = out.c_t_data - out.c_t_emp;
    return out;
}

double delta_power_from_delta_cf(const std::vector<DeltaCfSample>& series,
                                 const CleaningEvent& event, const ShipConfig& config,
                                 const DeltaPowerOptions& opts) {
    const auto window = static_cast<UtcSeconds>(opts.window_days * 86400.0);
    double sum_before = 0, sum_after = 0;
    std::size_t n_before = 0, n_after = 0;
    for (const auto& s : series) {
        if (s.timestamp < event.timestamp && s.timestamp >= event.timestamp - window) {
            sum_before += s.delta_cf;
            ++n_before;
        } else if (s.timestamp > event.timestamp &&
                   s.timestamp <= event.timestamp + window) {
            sum_after += s.delta_cf;
            ++n_after;
        }
    }
    if (n_before < opts.min_samples)
        throw DataError("delta_power_from_delta_cf: too few samples before the event");
    if (n_after < opts.min_samples)
        throw DataError("delta_power_from_delta_cf: too few samples after the event");

    double shift = sum_after / static_cast<double>(n_after) -
                   sum_before / static_cast<double>(n_before);
    double s_ref = config.wetted_surface(config.ballast_draft, 0.0);
    double v = config.service_speed * kKnotsToMps;
    return shift * 0.5 * config.water_density * s_ref * v * v * v /
           config.propulsive_efficiency / 1000.0;  // kW
}

void save_fouling_csv(const std::string& path, const FoulingSeries& series) {
    CsvTable t;
    t.header = {"timestamp", "hull_fgf", "prop_fgf", "total_fgf"};
    for (std::size_t i = 0; i < series.timestamps.size(); ++i)
        t.rows.push_back({format_iso8601(series.timestamps[i]),
                          format_double(series.hull_fgf[i]),
                          format_double(series.prop_fgf[i]),
                          format_double(series.total_fgf[i])});
    write_csv(path, t);
}

void save_delta_cf_csv(const std::string& path, const std::vector<DeltaCfSample>& series) {
    CsvTable t;
    t.header = {"timestamp", "c_t_data", "c_t_emp", "delta_cf"};
    for (const auto& s : series)
        t.rows.push_back({format_iso8601(s.timestamp), format_double(s.c_t_data),
                          format_double(s.c_t_emp), format_double(s.delta_cf)});
    write_csv(path, t);
}

FoulingSeries load_fouling_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci = t.column("timestamp"), ch = t.column("hull_fgf");
    int cp = t.column("prop_fgf"), ct = t.column("total_fgf");
    if (ci < 0 || ch < 0 || cp < 0 || ct < 0)
        throw SchemaError("fouling csv missing columns: " + path);
    FoulingSeries s;
    for (const auto& row : t.rows) {
        s.timestamps.push_back(parse_iso8601(row[static_cast<std::size_t>(ci)]));
        s.hull_fgf.push_back(std::stod(row[static_cast<std::size_t>(ch)]));
        s.prop_fgf.push_back(std::stod(row[static_cast<std::size_t>(cp)]));
        s.total_fgf.push_back(std::stod(row[static_cast<std::size_t>(ct)]));
    }
    return s;
}

std::vector<DeltaCfSample> load_delta_cf_csv(const std::string& path) {
    CsvTable t = read_csv(path);
    int ci = t.column("timestamp"), cd = t.column("c_t_data");
    int ce = t.column("c_t_emp"), cf = t.column("delta_cf");
    if (ci < 0 || cd < 0 || ce < 0 || cf < 0)
        throw SchemaError("delta-cf csv missing columns: " + path);
    std::vector<DeltaCfSample> out;
    for (const auto& row : t.rows) {
        DeltaCfSample s;
        s.timestamp = parse_iso8601(row[static_cast<std::size_t>(ci)]);
        s.c_t_data = std::stod(row[static_cast<std::size_t>(cd)]);
        s.c_t_emp = std::stod(row[static_cast<std::size_t>(ce)]);
        s.delta_cf = std::stod(row[static_cast<std::size_t>(cf)]);
        out.push_back(s);
    }
    return out;
}

}  // namespace shipperf
