#pragma once

#include <string>
#include <vector>

#include "shipperf/fouling.hpp"
#include "shipperf/mlp.hpp"
#include "shipperf/mvr.hpp"

namespace shipperf {

enum class ModelKind { Pcr, Plsr, Ann };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// One calibrated regression model behind a common prediction interface.
// Linear models carry the nonlinear feature/target columns; the network
// works on the plain columns.
struct CalibratedModel {
    ModelKind kind = ModelKind::Pcr;
    bool nonlinear_features = true;
    PcrModel pcr;
    PlsrModel plsr;
    MlpModel ann;

    const Standardizer& x_std() const;
    const Standardizer& y_std() const;
    // Raw-units mean prediction; rows follow the model's feature schema.
    Matrix predict(const Matrix& X_raw) const;
};

// Constant-condition scenario: fixed rpm and even-keel draft, zero
// environment, fouling state taken from the series along the timeline.
struct TrendScenario {
    double rpm = 0.0;
    double mean_draft = 0.0;
    std::vector<UtcSeconds> timeline;
    const FoulingSeries* fouling = nullptr;
};

// Fabricated raw-unit feature rows for the scenario, laid out for the given
// model (with or without the nonlinear columns).
Matrix fabricate_trend_input(const CalibratedModel& model, const TrendScenario& scenario);

struct TrendSeries {
    std::vector<UtcSeconds> timeline;
    std::vector<double> shaft_power;
    std::vector<double> gps_speed;   // cube-rooted cubic target for linear models
    std::vector<double> log_speed;
    std::vector<double> gps_speed_cubed;  // raw cubic target, linear models only
    std::vector<double> log_speed_cubed;
    bool clamped_negative_cube = false;
};

TrendSeries predict_trends(const CalibratedModel& model, const TrendScenario& scenario);

struct CurveCondition {
    UtcSeconds timestamp = 0;
    double mean_draft = 0.0;
    double trim = 0.0;
    double fgf = 0.0;
};

enum class SpeedVariable { Gps, Log };

struct CurvePrediction {
    std::vector<double> speed_kn;
    std::vector<double> power_kw;
    std::vector<double> lower_kw;  // 95% band; equals power_kw for non-MC models
    std::vector<double> upper_kw;
    CurveCondition condition;
    SpeedVariable speed_variable = SpeedVariable::Gps;
    bool monotonicity_warning = false;
    bool clamped_negative_cube = false;
};

// Sweep rpm, predict (power, speed) at the fixed condition, sort by speed.
CurvePrediction predict_calm_water_curve(const CalibratedModel& model,
                                         const CurveCondition& condition,
                                         double rpm_min, double rpm_max, int n_points,
                                         SpeedVariable speed_variable,
                                         double mean_draft_hint = -1.0);

// Monotone linear interpolation of power at a speed; linear extrapolation
// from the end segment when the curve does not reach it (flagged).
double curve_power_at_speed(const CurvePrediction& curve, double speed_kn,
                            bool* extrapolated = nullptr);

struct EventDeltaPower {
    double dp_gps_kw = 0.0;
    double dp_log_kw = 0.0;
    bool extrapolated = false;
};

struct DeltaPowerCurveOptions {
    double step_seconds = 86400.0;  // "just before/after" distance
    double rpm_min = 0.0;           // 0 -> 40% of NCR
    double rpm_max = 0.0;           // 0 -> 110% of NCR
    int n_points = 25;
    double mean_draft = -1.0;       // <0 -> ballast draft
};

// Power at service speed read off the calm-water curve one timeline step
// before and after the event; negative means improvement.
EventDeltaPower delta_power_at_event(const CalibratedModel& model,
                                     const FoulingSeries& fouling,
                                     const CleaningEvent& event,
                                     const ShipConfig& config,
                                     const DeltaPowerCurveOptions& opts = {});

struct ReportRow {
    std::string label;  // event timestamp/kind or "start vs end"
    UtcSeconds timestamp = 0;
    std::string kind;
    // Parallel to the models vector passed to build_report.
    std::vector<double> dp_gps_kw;
    std::vector<double> dp_log_kw;
    double dp_delta_cf_kw = 0.0;
    bool dp_delta_cf_available = false;
    bool improvement = false;  // any model predicts a net reduction
};

struct PerformanceReport {
    std::vector<std::string> model_names;
    std::vector<ReportRow> rows;
    std::vector<std::string> warnings;
};

PerformanceReport build_report(const std::vector<CalibratedModel>& models,
                               const FoulingSeries& fouling,
                               const std::vector<CleaningEvent>& events,
                               const std::vector<DeltaCfSample>& delta_cf_series,
                               const ShipConfig& config,
                               const DeltaPowerCurveOptions& opts = {});

void save_report_csv(const std::string& path, const PerformanceReport& report);
void save_report_json(const std::string& path, const PerformanceReport& report);
void save_curve_csv(const std::string& path, const CurvePrediction& curve);
void save_trend_csv(const std::string& path, const TrendSeries& series);

// Minimal line plot with the band as a filled polygon, no external deps.
void write_curve_svg(const std::string& path,
                     const std::vector<CurvePrediction>& curves,
                     const std::vector<std::string>& labels,
                     const std::string& title);

}  // namespace shipperf
