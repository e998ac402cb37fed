#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "shipperf/preprocess.hpp"

namespace shipperf {

struct PcaFactorization {
    Matrix scores;     // T_A, m x A
    Matrix loadings;   // P_A, n x A, orthonormal columns
    Matrix residual;   // E_A, m x n
    Vector explained_variance;  // length A, non-increasing
};

// SVD-based factorization of a standardized matrix. Sign convention: the
// largest-magnitude element of each loading column is positive.
PcaFactorization pca_fit(const Matrix& X, int A);

struct PcrModel {
    int A = 0;
    Matrix loadings;  // n x A
    Matrix coeffs;    // A x k
    Vector ridge_alpha;  // chosen alpha per target
    Standardizer x_std;
    Standardizer y_std;
    std::vector<std::string> warnings;

    // X_raw rows in original units; returns destandardized predictions.
    Matrix predict(const Matrix& X_raw) const;
    // Standardized-in, standardized-out path.
    Matrix predict_standardized(const Matrix& X_stdized) const;
};

inline const std::vector<double>& default_ridge_grid() {
    static const std::vector<double> g{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
    return g;
}

// Ridge on PC scores, alpha chosen per target by generalized leave-one-out
// cross-validation over the candidate grid.
PcrModel pcr_fit(const Matrix& X, const Matrix& Y, int A,
                 const std::vector<double>& ridge_alphas = default_ridge_grid());

struct PlsrModel {
    int A = 0;
    Matrix weights;     // W, n x A, unit-norm columns
    Matrix x_loadings;  // P, n x A
    Matrix y_loadings;  // Q, k x A, unit-norm columns
    Vector inner_coeffs;  // b_a relating u_a to t_a
    Matrix regression;    // n x k operator on standardized X
    Standardizer x_std;
    Standardizer y_std;

    Matrix predict(const Matrix& X_raw) const;
    Matrix predict_standardized(const Matrix& X_stdized) const;
};

PlsrModel plsr_fit(const Matrix& X, const Matrix& Y, int A, double tol = 1e-10,
                   int max_iter = 10000);

enum class LinearModelKind { Pcr, Plsr };

struct CvReport {
    Matrix press;   // max_A x k, PRESS_a per target
    Matrix ss;      // (max_A + 1) x k, SS_a per target; row 0 is SS_0
    Matrix ratios;  // max_A x k, PRESS_a / SS_{a-1}
    int selected_A = 1;
    bool no_significant_component = false;
    int evaluated_A = 0;  // candidates actually scanned
};

// "Sequential mode" cross-validation over contiguous folds. A component a
// is significant iff PRESS_a/SS_{a-1} < threshold for at least one target;
// the scan stops at the first non-significant component.
CvReport sequential_cv(const Matrix& X, const Matrix& Y, LinearModelKind kind,
                       int max_A, int folds = 20, double threshold = 0.9);

struct TargetMetrics {
    double mae = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    bool r2_defined = true;
};

std::vector<TargetMetrics> regression_metrics(const Matrix& Y_true, const Matrix& Y_pred);

}  // namespace shipperf
