#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shipperf/types.hpp"

namespace shipperf {

// Synthetic fleet scenario with a known resistance model and injected
// fouling drift; the closed-form truth is the oracle for end-to-end checks.
struct SynthScenario {
    UtcSeconds start_time = 1546300800;  // 2019-01-01T00:00:00Z
    double duration_days = 365.0;
    int sample_interval_s = 900;

    ShipConfig ship;
    double calm_coeff = 0.0035;  // kW per t^(2/3) kn^3

    // Fraction of calm power added per accumulated static hour.
    double hull_penalty_rate = 0.0;
    double prop_penalty_rate = 0.0;
    std::vector<CleaningEvent> events;

    // Voyage/port schedule.
    double sailing_days_min = 2.0;
    double sailing_days_max = 6.0;
    double port_days_min = 0.5;
    double port_days_max = 2.0;
    std::vector<double> cruise_speeds_kn = {10.0, 14.5, 15.5};
    std::vector<double> cruise_speed_weights = {0.1, 0.45, 0.45};
    double laden_draft = 9.0;
    // Ballast draft comes from ship.ballast_draft; voyages alternate.

    // Sensor/environment noise.
    double power_noise_kw = 0.0;
    double speed_noise_kn = 0.0;
    double wind_sigma = 2.0;     // m/s per component
    double wave_sigma = 0.35;    // m
    double current_sigma_kn = 0.3;

    std::uint64_t seed = 1;
};

struct SynthTruth {
    std::vector<double> fouling_multiplier;  // per sample, >= 1
    std::vector<double> calm_power_at_service;  // kW, per sample, ballast condition
    std::vector<double> event_delta_power_kw;   // exact dP at service speed per event
    double displacement_ref = 0.0;  // t, ballast condition
};

struct SynthResult {
    std::vector<VoyageSample> samples;
    std::vector<CleaningEvent> events;
    SynthTruth truth;
};

SynthResult generate(const SynthScenario& scenario);

// Exact power change for one of the scenario's events, from the generator's
// closed form. Negative means improvement.
double truth_delta_power(const SynthResult& result, const CleaningEvent& event);

void save_truth_json(const std::string& path, const SynthResult& result);

// Scenario key-value file used by the CLI `synth` command.
SynthScenario load_scenario(const std::string& path);

}  // namespace shipperf
