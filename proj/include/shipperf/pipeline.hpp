#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shipperf/fouling.hpp"
#include "shipperf/mlp.hpp"
#include "shipperf/mvr.hpp"
#include "shipperf/performance.hpp"
#include "shipperf/preprocess.hpp"

namespace shipperf {

struct PreprocessOptions {
    int qs_window = 5;          // 75 min at 15-min samples
    double qs_rpm_band = 2.0;   // rev/min
    double qs_speed_band = 0.5; // knots
    double static_speed_kn = 3.0;
    bool raw_wave_dir = false;
    AdmiraltyFitOptions admiralty;
    VoyageSeriesOptions voyage;
    SplitOptions split;
};

// In-memory hand-off between the pipeline stages; the CLI writes each piece
// to its own artifact file.
struct PreprocessResult {
    std::vector<VoyageSample> samples;  // sorted input
    std::vector<bool> steady_mask;
    std::vector<bool> near_calm_mask;
    HindcastValidation hindcast;
    AdmiraltyModel admiralty;
    VoyageSeries voyages;
    std::vector<LegTrend> leg_trends;
    FoulingSeries fouling;
    std::vector<DeltaCfSample> delta_cf;
    FeatureMatrix features_nl;   // linear models, nonlinear columns included
    FeatureMatrix features_lin;  // network features, plain columns
    SplitPlan split;
    std::vector<CleaningEvent> events;
    ShipConfig ship;
};

PreprocessResult run_preprocess(std::vector<VoyageSample> samples,
                                std::vector<CleaningEvent> events,
                                const ShipConfig& ship,
                                const PreprocessOptions& opts = {});

struct CalibrateOptions {
    bool use_pcr = true;
    bool use_plsr = true;
    bool use_ann = true;
    int folds = 20;
    int max_A = 0;  // 0 -> number of inputs
    double cv_threshold = 0.9;
    int hidden_units = 50;
    int hidden_layers = 1;
    double p_drop = 0.2;
    double tau = 1.0;
    double length_scale = 10.0;
    int t_passes = 10000;
    std::uint64_t seed = 1;
    TrainOptions train;
};

struct ModelMetrics {
    std::string model;  // pcr / plsr / ann_std / ann_mc
    std::string split;  // train / test
    std::vector<std::string> targets;
    std::vector<TargetMetrics> per_target;
};

struct CalibrationResult {
    std::vector<CalibratedModel> models;
    CvReport cv_pcr;
    CvReport cv_plsr;
    std::vector<ModelMetrics> metrics;
    std::vector<std::string> errors;  // per-model failures, others still fitted
};

CalibrationResult run_calibrate(PreprocessResult& pre, const CalibrateOptions& opts);

void save_metrics_csv(const std::string& path, const std::vector<ModelMetrics>& metrics);

}  // namespace shipperf
