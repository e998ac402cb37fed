#include "shipperf/mvr.hpp"

#include <cmath>
#include <limits>

namespace shipperf {

namespace {

// Flip column signs so the largest-magnitude element is positive; applied
// jointly to loadings and scores to keep the factorization intact.
void fix_signs(Matrix& loadings, Matrix* scores) {
    for (Eigen::Index a = 0; a < loadings.cols(); ++a) {
        Eigen::Index imax = 0;
        loadings.col(a).cwiseAbs().maxCoeff(&imax);
        if (loadings(imax, a) < 0) {
            loadings.col(a) = -loadings.col(a);
            if (scores) scores->col(a) = -scores->col(a);
        }
    }
}

}  // namespace

PcaFactorization pca_fit(const Matrix& X, int A) {
    const auto m = X.rows();
    const auto n = X.cols();
    if (A < 1 || A > std::min(m, n)) throw ModelError("pca_fit: invalid component count");

    Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    if (s[0] <= 0 || s[A - 1] < 1e-10 * s[0])
        throw ModelError("pca_fit: requested components exceed matrix rank");

    PcaFactorization f;
    f.loadings = svd.matrixV().leftCols(A);
    f.scores = svd.matrixU().leftCols(A) * s.head(A).asDiagonal();
    fix_signs(f.loadings, &f.scores);
    f.residual = X - f.scores * f.loadings.transpose();
    f.explained_variance =
        s.head(A).array().square() / static_cast<double>(m);
    return f;
}

PcrModel pcr_fit(const Matrix& X, const Matrix& Y, int A,
                 const std::vector<double>& ridge_alphas) {
    if (ridge_alphas.empty()) throw ModelError("pcr_fit: empty ridge grid");
    PcaFactorization pca = pca_fit(X, A);
    const auto m = X.rows();
    const auto k = Y.cols();

    // Scores have orthogonal columns, so ridge and its generalized LOO
    // cross-validation reduce to per-component shrinkage.
    Vector d(A);  // t_j' t_j
    for (int j = 0; j < A; ++j) d[j] = pca.scores.col(j).squaredNorm();
    Matrix c = pca.scores.transpose() * Y;  // A x k

    PcrModel model;
    model.A = A;
    model.loadings = pca.loadings;
    model.coeffs = Matrix::Zero(A, k);
    model.ridge_alpha = Vector::Zero(k);

    double smallest_positive = std::numeric_limits<double>::infinity();
    for (double a : ridge_alphas)
        if (a > 0) smallest_positive = std::min(smallest_positive, a);

    for (Eigen::Index t = 0; t < k; ++t) {
        double ynorm2 = Y.col(t).squaredNorm();
        double fit_part = 0;
        for (int j = 0; j < A; ++j) fit_part += c(j, t) * c(j, t) / d[j];
        double perp2 = std::max(0.0, ynorm2 - fit_part);

        double best_gcv = std::numeric_limits<double>::infinity();
        double best_alpha = 0;
        for (double alpha : ridge_alphas) {
            if (alpha <= 0 && d.minCoeff() < 1e-12) {
                model.warnings.push_back(
                    "singular normal equations at alpha=0; falling back to "
                    "smallest positive candidate");
                continue;
            }
            double rss = perp2, edf = 0;
            for (int j = 0; j < A; ++j) {
                double shrink = c(j, t) * (1.0 / d[j] - 1.0 / (d[j] + alpha));
                rss += d[j] * shrink * shrink;
                edf += d[j] / (d[j] + alpha);
            }
            double denom = static_cast<double>(m) - edf;
            double gcv = static_cast<double>(m) * rss / (denom * denom);
            if (gcv < best_gcv) {
                best_gcv = gcv;
                best_alpha = alpha;
            }
        }
        if (!std::isfinite(best_gcv)) {
            if (!std::isfinite(smallest_positive))
                throw ModelError("pcr_fit: no usable ridge candidate");
            best_alpha = smallest_positive;
        }
        model.ridge_alpha[t] = best_alpha;
        for (int j = 0; j < A; ++j)
            model.coeffs(j, t) = c(j, t) / (d[j] + best_alpha);
    }
    return model;
}

Matrix PcrModel::predict_standardized(const Matrix& X_stdized) const {
    return X_stdized * loadings * coeffs;
}

Matrix PcrModel::predict(const Matrix& X_raw) const {
    if (x_std.means.size() == 0) throw ModelError("PcrModel: standardizer not attached");
    if (X_raw.cols() != x_std.means.size())
        throw ModelError("PcrModel: input column mismatch");
    return y_std.invert(predict_standardized(x_std.apply(X_raw)));
}

PlsrModel plsr_fit(const Matrix& X, const Matrix& Y, int A, double tol, int max_iter) {
    const auto n = X.cols();
    const auto k = Y.cols();
    if (A < 1 || A > std::min(X.rows(), n))
        throw ModelError("plsr_fit: invalid factor count");
    if (tol <= 0) throw ModelError("plsr_fit: tolerance must be positive");

    Matrix E = X, F = Y;
    PlsrModel model;
    model.A = A;
    model.weights = Matrix::Zero(n, A);
    model.x_loadings = Matrix::Zero(n, A);
    model.y_loadings = Matrix::Zero(k, A);
    model.inner_coeffs = Vector::Zero(A);
    Matrix scores(X.rows(), A);

    for (int a = 0; a < A; ++a) {
        // Deterministic start: the Y-residual column of largest variance.
        Eigen::Index start_col = 0;
        double best_var = -1;
        for (Eigen::Index j = 0; j < k; ++j) {
            double v = (F.col(j).array() - F.col(j).mean()).square().sum();
            if (v > best_var) {
                best_var = v;
                start_col = j;
            }
        }
        // Only an exactly-zero residual is degenerate: with k targets the
        // deflation drives F to rounding noise after k factors, and such
        // factors legitimately contribute a negligible inner coefficient.
        Vector u = F.col(start_col);
        if (u.norm() == 0.0)
            throw ModelError("plsr_fit: degenerate target residual at factor " +
                             std::to_string(a + 1));

        Vector t_prev = Vector::Zero(X.rows());
        Vector w(n), t(X.rows()), q(k);
        double change = 0;
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            w = E.transpose() * u;
            double wn = w.norm();
            if (wn == 0.0)
                throw ModelError("plsr_fit: zero weight vector at factor " +
                                 std::to_string(a + 1));
            w /= wn;
            t = E * w;
            q = F.transpose() * t;
            double qn = q.norm();
            if (qn == 0.0)
                throw ModelError("plsr_fit: degenerate target at factor " +
                                 std::to_string(a + 1));
            q /= qn;
            u = F * q;
            change = (t - t_prev).norm() / std::max(t.norm(), 1e-300);
            if (change < tol) {
                converged = true;
                break;
            }
            t_prev = t;
        }
        if (!converged)
            throw ModelError("plsr_fit: factor " + std::to_string(a + 1) +
                             " did not converge (last change " +
                             std::to_string(change) + ")");

        double tt = t.squaredNorm();
        Vector p = E.transpose() * t / tt;
        double b = t.dot(u) / tt;
        model.weights.col(a) = w;
        model.x_loadings.col(a) = p;
        model.y_loadings.col(a) = q;
        model.inner_coeffs[a] = b;
        scores.col(a) = t;
        E -= t * p.transpose();
        F -= u * q.transpose();
    }

    // Linear operator on standardized X: scores = X W (P'W)^-1, then the
    // inner relation and Y loadings map scores to Y.
    Matrix pw = model.x_loadings.transpose() * model.weights;  // A x A
    Matrix rot = model.weights * pw.inverse();                 // n x A
    model.regression =
        rot * model.inner_coeffs.asDiagonal() * model.y_loadings.transpose();
    return model;
}

Matrix PlsrModel::predict_standardized(const Matrix& X_stdized) const {
    return X_stdized * regression;
}

Matrix PlsrModel::predict(const Matrix& X_raw) const {
    if (x_std.means.size() == 0) throw ModelError("PlsrModel: standardizer not attached");
    if (X_raw.cols() != x_std.means.size())
        throw ModelError("PlsrModel: input column mismatch");
    return y_std.invert(predict_standardized(x_std.apply(X_raw)));
}

namespace {

// Predictions for every candidate dimensionality from one factorization of
// the training block; components nest for both model kinds.
struct NestedPredictor {
    std::vector<Matrix> per_a;  // predictions on the evaluation block, 1..max_A
};

NestedPredictor nested_predictions(const Matrix& Xtr, const Matrix& Ytr,
                                   const Matrix& Xev, LinearModelKind kind,
                                   int max_A) {
    NestedPredictor out;
    out.per_a.reserve(static_cast<std::size_t>(max_A));
    if (kind == LinearModelKind::Pcr) {
        for (int a = 1; a <= max_A; ++a) {
            PcrModel m = pcr_fit(Xtr, Ytr, a);
            out.per_a.push_back(m.predict_standardized(Xev));
        }
    } else {
        PlsrModel full = plsr_fit(Xtr, Ytr, max_A);
        for (int a = 1; a <= max_A; ++a) {
            Matrix pw = full.x_loadings.leftCols(a).transpose() * full.weights.leftCols(a);
            Matrix rot = full.weights.leftCols(a) * pw.inverse();
            Matrix reg = rot * full.inner_coeffs.head(a).asDiagonal() *
                         full.y_loadings.leftCols(a).transpose();
            out.per_a.push_back(Xev * reg);
        }
    }
    return out;
}

}  // namespace

CvReport sequential_cv(const Matrix& X, const Matrix& Y, LinearModelKind kind,
                       int max_A, int folds, double threshold) {
    const int m = static_cast<int>(X.rows());
    const auto k = Y.cols();
    if (max_A < 1) throw ModelError("sequential_cv: max_A must be >= 1");
    if (folds < 2) throw ModelError("sequential_cv: folds must be >= 2");
    if (m < folds) throw ModelError("sequential_cv: fewer rows than folds");
    max_A = std::min<int>(max_A, static_cast<int>(X.cols()));
    // Candidate dimensionalities beyond the numerical rank of X are not
    // fittable (collinear feature columns reduce the rank below n).
    {
        Eigen::BDCSVD<Matrix> svd(X);
        const Vector& s = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s[i] >= 1e-10 * s[0]) ++rank;
        max_A = std::min(max_A, std::max(1, rank));
    }

    CvReport rep;
    rep.press = Matrix::Zero(max_A, k);
    rep.ss = Matrix::Zero(max_A + 1, k);
    rep.ratios = Matrix::Zero(max_A, k);

    // SS_0: total sum of squares of the (standardized) target about zero.
    for (Eigen::Index t = 0; t < k; ++t) rep.ss(0, t) = Y.col(t).squaredNorm();

    // Contiguous fold boundaries.
    std::vector<int> bounds(static_cast<std::size_t>(folds) + 1);
    for (int f = 0; f <= folds; ++f)
        bounds[static_cast<std::size_t>(f)] =
            static_cast<int>(static_cast<long long>(f) * m / folds);

    // Full-data model per candidate dimensionality -> SS_a.
    {
        NestedPredictor full = nested_predictions(X, Y, X, kind, max_A);
        for (int a = 1; a <= max_A; ++a) {
            Matrix resid = Y - full.per_a[static_cast<std::size_t>(a - 1)];
            for (Eigen::Index t = 0; t < k; ++t)
                rep.ss(a, t) = resid.col(t).squaredNorm();
        }
    }

    // Leave-one-fold-out models; folds are independent and reduced in fold
    // order so the report is identical under any schedule.
    std::vector<Matrix> fold_press(static_cast<std::size_t>(folds));
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < folds; ++f) {
        int lo = bounds[static_cast<std::size_t>(f)];
        int hi = bounds[static_cast<std::size_t>(f) + 1];
        int ntr = m - (hi - lo);
        Matrix Xtr(ntr, X.cols()), Ytr(ntr, k);
        Xtr << X.topRows(lo), X.bottomRows(m - hi);
        Ytr << Y.topRows(lo), Y.bottomRows(m - hi);
        Matrix Xev = X.middleRows(lo, hi - lo);
        Matrix Yev = Y.middleRows(lo, hi - lo);

        NestedPredictor pred = nested_predictions(Xtr, Ytr, Xev, kind, max_A);
        Matrix press = Matrix::Zero(max_A, k);
        for (int a = 1; a <= max_A; ++a) {
            Matrix resid = Yev - pred.per_a[static_cast<std::size_t>(a - 1)];
            for (Eigen::Index t = 0; t < k; ++t)
                press(a - 1, t) = resid.col(t).squaredNorm();
        }
        fold_press[static_cast<std::size_t>(f)] = std::move(press);
    }
    for (int f = 0; f < folds; ++f) rep.press += fold_press[static_cast<std::size_t>(f)];

    rep.selected_A = 1;
    rep.no_significant_component = false;
    int a = 1;
    for (; a <= max_A; ++a) {
        bool significant = false;
        for (Eigen::Index t = 0; t < k; ++t) {
            rep.ratios(a - 1, t) = rep.press(a - 1, t) / rep.ss(a - 1, t);
            if (rep.ratios(a - 1, t) < threshold) significant = true;
        }
        if (!significant) {
            rep.selected_A = a - 1;
            break;
        }
        rep.selected_A = a;
    }
    rep.evaluated_A = std::min(a, max_A);
    if (rep.selected_A < 1) {
        rep.selected_A = 1;
        rep.no_significant_component = true;
    }
    return rep;
}

std::vector<TargetMetrics> regression_metrics(const Matrix& Y_true, const Matrix& Y_pred) {
    if (Y_true.rows() != Y_pred.rows() || Y_true.cols() != Y_pred.cols())
        throw ModelError("regression_metrics: shape mismatch");
    if (Y_true.rows() < 2) throw ModelError("regression_metrics: need at least 2 rows");
    std::vector<TargetMetrics> out;
    const double m = static_cast<double>(Y_true.rows());
    for (Eigen::Index t = 0; t < Y_true.cols(); ++t) {
        TargetMetrics tm;
        Vector err = Y_pred.col(t) - Y_true.col(t);
        tm.mae = err.cwiseAbs().mean();
        tm.rmse = std::sqrt(err.squaredNorm() / m);
        double mean = Y_true.col(t).mean();
        double sst = (Y_true.col(t).array() - mean).square().sum();
        if (sst <= 0) {
            tm.r2 = std::nan("");
            tm.r2_defined = false;
        } else {
            tm.r2 = 1.0 - err.squaredNorm() / sst;
        }
        out.push_back(tm);
    }
    return out;
}

}  // namespace shipperf
