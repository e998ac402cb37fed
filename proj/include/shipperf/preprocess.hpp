#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "shipperf/types.hpp"

namespace shipperf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Per-column mean/std fitted on training rows only.
struct Standardizer {
    Vector means;
    Vector stds;
    std::vector<std::string> column_names;

    void fit(const Matrix& data, const std::vector<int>& train_rows);
    Matrix apply(const Matrix& data) const;
    Matrix invert(const Matrix& standardized) const;
    Vector invert_row(const Vector& standardized_row) const;
};

struct FeatureMatrix {
    Matrix X;  // m x n inputs
    Matrix Y;  // m x k targets
    std::vector<std::string> x_names;
    std::vector<std::string> y_names;
    std::vector<bool> x_nonlinear;  // marker for transformed columns
    std::vector<bool> y_nonlinear;
    std::vector<UtcSeconds> row_timestamps;
    Standardizer x_std;
    Standardizer y_std;
    bool standardized = false;
};

// Table-3 style feature layout. fgf_total must be aligned with samples.
// Wave direction enters as cos(angle) unless raw_wave_dir is set.
FeatureMatrix build_features(const std::vector<VoyageSample>& samples,
                             const std::vector<double>& fgf_total,
                             bool include_nonlinear, bool raw_wave_dir = false);

void fit_standardizer(FeatureMatrix& fm, const std::vector<int>& train_rows);
void apply_standardizer(FeatureMatrix& fm);

struct IndexRange {
    int begin = 0;  // inclusive
    int end = 0;    // exclusive
    int size() const { return end - begin; }
};

struct SplitPlan {
    std::vector<IndexRange> train;
    std::vector<IndexRange> validation;
    std::vector<IndexRange> test;
    std::vector<std::string> warnings;

    std::vector<int> train_rows() const;
    std::vector<int> validation_rows() const;
    std::vector<int> test_rows() const;
};

enum class SplitLayout { OriginalShip, SisterShip, Custom };

struct SplitOptions {
    SplitLayout layout = SplitLayout::OriginalShip;
    double test_fraction = 0.2;
    bool with_validation = false;   // carve a middle 10% of train
    double custom_train = 1.0;      // Custom layout only
    double custom_test = 0.0;
    int min_train_samples_per_event_side = 0;
};

SplitPlan chronological_split(int m, const std::vector<CleaningEvent>& events,
                              const std::vector<UtcSeconds>& timestamps,
                              const SplitOptions& opts);

// Sliding-window range test on shaft rpm and GPS speed; boundary samples
// with incomplete windows are masked false.
std::vector<bool> quasi_steady_filter(const std::vector<VoyageSample>& samples,
                                      int window_len, double rpm_band,
                                      double speed_band);

struct HindcastValidation {
    double current_bias = 0.0;       // knots
    double current_rmse = 0.0;       // knots
    double current_correlation = 0.0;
    bool current_correlation_defined = true;
    std::size_t pairs = 0;
};

// Compares (gps - log) speed against the hindcast longitudinal current
// (aiding-positive, converted to knots).
HindcastValidation validate_hindcast(const std::vector<VoyageSample>& samples);

constexpr double kKnotsToMps = 0.514444;

}  // namespace shipperf
