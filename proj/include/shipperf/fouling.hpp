#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shipperf/preprocess.hpp"
#include "shipperf/types.hpp"

namespace shipperf {

// Pluggable added-resistance estimators returning Newtons for one sample.
struct ResistanceEstimators {
    std::function<double(const VoyageSample&)> wind;
    std::function<double(const VoyageSample&)> wave;
    std::function<double(const VoyageSample&)> others;  // optional, defaults to 0
};

// Default coefficient models: quadratic relative-wind drag (added over the
// still-air term) and an Hs^2-proportional wave term.
ResistanceEstimators default_estimators(const ShipConfig& config);

// Wind magnitude < 5.5 m/s and Hs < 1 m (both strict).
std::vector<bool> near_calm_filter(const std::vector<VoyageSample>& samples);

// P_corrected = P_s - (R_wind + R_wave) * V_log / eta_T, floored at 5% of
// P_s (flagged via the optional out-parameter).
double correct_power_near_calm(const VoyageSample& sample, const ShipConfig& config,
                               const ResistanceEstimators& est,
                               bool* floored = nullptr);

struct AdmiraltyModel {
    double m_exp = 0.0;  // displacement exponent
    double n_exp = 0.0;  // speed exponent
    double log_const = 0.0;
    double r2 = 0.0;
    double residual_std = 0.0;
    std::size_t samples_used = 0;

    // Delta^m V^n / P, with V in knots and P in kW.
    double coefficient(double displacement_t, double speed_kn, double power_kw) const;
};

struct AdmiraltyFitOptions {
    double min_speed_kn = 3.0;
    std::size_t min_samples = 50;
};

// Least-squares fit of log(P) = m log(Delta) + n log(V) + c on near-calm
// corrected samples.
AdmiraltyModel fit_admiralty_exponents(const std::vector<VoyageSample>& samples,
                                       const std::vector<bool>& near_calm_mask,
                                       const ShipConfig& config,
                                       const ResistanceEstimators& est,
                                       const AdmiraltyFitOptions& opts = {});

struct VoyagePoint {
    double cumulative_static_hours = 0.0;  // at voyage start
    double mean_admiralty = 0.0;
    UtcSeconds start = 0;
    UtcSeconds end = 0;
    std::size_t samples = 0;
};

struct VoyageSeriesOptions {
    double static_speed_threshold_kn = 3.0;
    double min_port_gap_hours = 6.0;  // static stretch delimiting voyages
    std::size_t min_samples_per_voyage = 5;
};

struct VoyageSeries {
    std::vector<VoyagePoint> points;
    std::size_t skipped_voyages = 0;
};

VoyageSeries voyage_admiralty_series(const std::vector<VoyageSample>& samples,
                                     const AdmiraltyModel& admiralty,
                                     const std::vector<bool>& valid_mask,
                                     const ShipConfig& config,
                                     const ResistanceEstimators& est,
                                     const VoyageSeriesOptions& opts = {});

struct LegTrend {
    double slope = 0.0;          // admiralty units per static hour
    double start_value = 0.0;    // fitted value at the leg-start abscissa
    double fgr = 0.0;            // fraction per static hour
    bool replaced = false;       // abnormal or under-sampled leg
    std::size_t points = 0;
};

// One trend per leg between cleaning events; abnormal legs (positive slope)
// and legs with too few points are replaced by the minimum positive rate.
std::vector<LegTrend> fit_leg_trends(const VoyageSeries& series,
                                     const std::vector<CleaningEvent>& events);

struct FoulingSeries {
    std::vector<UtcSeconds> timestamps;
    std::vector<double> hull_fgf;
    std::vector<double> prop_fgf;
    std::vector<double> total_fgf;
    std::vector<double> fgr_per_leg;
    std::vector<CleaningEvent> events;

    // Value at an arbitrary instant: the sample at-or-before t (the sample
    // at a cleaning instant already carries the reset).
    double total_at(UtcSeconds t) const;
    double hull_at(UtcSeconds t) const;
    double prop_at(UtcSeconds t) const;
};

FoulingSeries compute_fgf(const std::vector<VoyageSample>& samples,
                          const std::vector<CleaningEvent>& events,
                          const std::vector<double>& fgr_per_leg,
                          double static_speed_threshold_kn = 3.0);

struct DeltaCfSample {
    UtcSeconds timestamp = 0;
    double c_t_data = 0.0;
    double c_t_emp = 0.0;
    double delta_cf = 0.0;
    double r_calm = 0.0;
    double r_wind = 0.0;
    double r_wave = 0.0;
    double r_others = 0.0;
    bool extrapolated_surface = false;
};

// Calm-water resistance model used on the empirical side of the coefficient
// comparison; defaults to a fitted a * Delta^{2/3} V^2-shaped drag when the
// caller supplies one, else zero.
using CalmResistanceFn = std::function<double(const VoyageSample&)>;

DeltaCfSample delta_cf(const VoyageSample& sample, const ShipConfig& config,
                       const ResistanceEstimators& est,
                       const CalmResistanceFn& calm = nullptr);

struct DeltaPowerOptions {
    double window_days = 14.0;
    std::size_t min_samples = 10;
};

// Power-demand change across one event from the shift in mean delta-CF,
// evaluated at service speed and ballast wetted surface. Negative means
// improvement.
double delta_power_from_delta_cf(const std::vector<DeltaCfSample>& series,
                                 const CleaningEvent& event, const ShipConfig& config,
                                 const DeltaPowerOptions& opts = {});

void save_fouling_csv(const std::string& path, const FoulingSeries& series);
void save_delta_cf_csv(const std::string& path, const std::vector<DeltaCfSample>& series);

// Loaders for the artifact files written above (value columns only).
FoulingSeries load_fouling_csv(const std::string& path);
std::vector<DeltaCfSample> load_delta_cf_csv(const std::string& path);

}  // namespace shipperf
