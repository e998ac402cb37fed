#include "shipperf/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "shipperf/csv.hpp"

namespace shipperf {

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

}  // namespace

PreprocessResult run_preprocess(std::vector<VoyageSample> samples,
                                std::vector<CleaningEvent> events,
                                const ShipConfig& ship,
                                const PreprocessOptions& opts) {
    ship.validate();
    std::sort(samples.begin(), samples.end(),
              [](const VoyageSample& a, const VoyageSample& b) {
                  return a.timestamp < b.timestamp;
              });
    std::sort(events.begin(), events.end(),
              [](const CleaningEvent& a, const CleaningEvent& b) {
                  return a.timestamp < b.timestamp;
              });

    PreprocessResult res;
    res.ship = ship;
    res.events = events;
    res.samples = std::move(samples);

    res.steady_mask = quasi_steady_filter(res.samples, opts.qs_window,
                                          opts.qs_rpm_band, opts.qs_speed_band);
    res.hindcast = validate_hindcast(res.samples);
    res.near_calm_mask = near_calm_filter(res.samples);

    ResistanceEstimators est = default_estimators(ship);
    std::vector<bool> calm_steady(res.samples.size());
    for (std::size_t i = 0; i < res.samples.size(); ++i)
        calm_steady[i] = res.steady_mask[i] && res.near_calm_mask[i];

    res.admiralty = fit_admiralty_exponents(res.samples, calm_steady, ship, est,
                                            opts.admiralty);
    res.voyages = voyage_admiralty_series(res.samples, res.admiralty, calm_steady,
                                          ship, est, opts.voyage);
    res.leg_trends = fit_leg_trends(res.voyages, events);
    std::vector<double> fgr;
    for (const LegTrend& t : res.leg_trends) fgr.push_back(t.fgr);
    res.fouling = compute_fgf(res.samples, events, fgr, opts.static_speed_kn);

    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        const VoyageSample& s = res.samples[i];
        if (res.steady_mask[i] && s.log_speed > opts.static_speed_kn &&
            s.shaft_power > 0)
            res.delta_cf.push_back(delta_cf(s, ship, est));
    }

    // Calibration rows: quasi-steady sailing samples only; static/port rows
    // would otherwise tie zero power to arbitrary fouling states.
    std::vector<VoyageSample> rows;
    std::vector<double> fgf_rows;
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        const VoyageSample& s = res.samples[i];
        if (!res.steady_mask[i]) continue;
        if (s.log_speed <= opts.static_speed_kn || s.gps_speed <= opts.static_speed_kn)
            continue;
        if (s.shaft_power <= 0) continue;
        rows.push_back(s);
        fgf_rows.push_back(res.fouling.total_at(s.timestamp));
    }
    if (rows.size() < 100)
        throw DataError("preprocess: only " + std::to_string(rows.size()) +
                        " calibration rows after filtering");

    res.features_nl = build_features(rows, fgf_rows, true, opts.raw_wave_dir);
    res.features_lin = build_features(rows, fgf_rows, false, opts.raw_wave_dir);

    res.split = chronological_split(static_cast<int>(rows.size()), events,
                                    res.features_nl.row_timestamps, opts.split);
    std::vector<int> train = res.split.train_rows();
    fit_standardizer(res.features_nl, train);
    fit_standardizer(res.features_lin, train);
    return res;
}

namespace {

void append_metrics(std::vector<ModelMetrics>& metrics, const std::string& name,
                    const FeatureMatrix& fm, const SplitPlan& split,
                    const std::function<Matrix(const Matrix&)>& predict_raw) {
    // Report the three physical targets only; cubed columns are internal.
    const int k = 3;
    std::vector<std::string> targets(fm.y_names.begin(), fm.y_names.begin() + k);
    for (const char* part : {"train", "test"}) {
        std::vector<int> rows = std::string(part) == "train" ? split.train_rows()
                                                             : split.test_rows();
        Matrix X = gather_rows(fm.X, rows);
        Matrix Yt = gather_rows(fm.Y, rows).leftCols(k);
        Matrix Yp = predict_raw(X).leftCols(k);
        ModelMetrics mm;
        mm.model = name;
        mm.split = part;
        mm.targets = targets;
        mm.per_target = regression_metrics(Yt, Yp);
        metrics.push_back(std::move(mm));
    }
}

}  // namespace

CalibrationResult run_calibrate(PreprocessResult& pre, const CalibrateOptions& opts) {
    CalibrationResult out;
    std::vector<int> train = pre.split.train_rows();
    std::vector<int> val = pre.split.validation_rows();

    // Linear models on the nonlinear feature layout.
    {
        FeatureMatrix& fm = pre.features_nl;
        Matrix Xs = fm.x_std.apply(fm.X);
        Matrix Ys = fm.y_std.apply(fm.Y);
        Matrix Xtr = gather_rows(Xs, train);
        Matrix Ytr = gather_rows(Ys, train);
        int max_A = opts.max_A > 0 ? opts.max_A : static_cast<int>(fm.X.cols());

        if (opts.use_pcr) {
            try {
                out.cv_pcr = sequential_cv(Xtr, Ytr, LinearModelKind::Pcr, max_A,
                                           opts.folds, opts.cv_threshold);
                CalibratedModel m;
                m.kind = ModelKind::Pcr;
                m.nonlinear_features = true;
                m.pcr = pcr_fit(Xtr, Ytr, out.cv_pcr.selected_A);
                m.pcr.x_std = fm.x_std;
                m.pcr.y_std = fm.y_std;
                append_metrics(out.metrics, "pcr", fm, pre.split,
                               [&](const Matrix& X) { return m.pcr.predict(X); });
                out.models.push_back(std::move(m));
            } catch (const std::exception& ex) {
                out.errors.push_back(std::string("pcr: ") + ex.what());
            }
        }
        if (opts.use_plsr) {
            try {
                out.cv_plsr = sequential_cv(Xtr, Ytr, LinearModelKind::Plsr, max_A,
                                            opts.folds, opts.cv_threshold);
                CalibratedModel m;
                m.kind = ModelKind::Plsr;
                m.nonlinear_features = true;
                m.plsr = plsr_fit(Xtr, Ytr, out.cv_plsr.selected_A);
                m.plsr.x_std = fm.x_std;
                m.plsr.y_std = fm.y_std;
                append_metrics(out.metrics, "plsr", fm, pre.split,
                               [&](const Matrix& X) { return m.plsr.predict(X); });
                out.models.push_back(std::move(m));
            } catch (const std::exception& ex) {
                out.errors.push_back(std::string("plsr: ") + ex.what());
            }
        }
    }

    if (opts.use_ann) {
        try {
            FeatureMatrix& fm = pre.features_lin;
            Matrix Xs = fm.x_std.apply(fm.X);
            Matrix Ys = fm.y_std.apply(fm.Y);
            Matrix Xtr = gather_rows(Xs, train);
            Matrix Ytr = gather_rows(Ys, train);
            Matrix Xval = gather_rows(Xs, val);
            Matrix Yval = gather_rows(Ys, val);

            std::vector<int> layers{static_cast<int>(fm.X.cols())};
            for (int l = 0; l < opts.hidden_layers; ++l)
                layers.push_back(opts.hidden_units);
            layers.push_back(static_cast<int>(fm.Y.cols()));

            CalibratedModel m;
            m.kind = ModelKind::Ann;
            m.nonlinear_features = false;
            m.ann = mlp_init(layers, opts.seed, opts.p_drop, opts.tau,
                             opts.length_scale);
            m.ann.t_passes = opts.t_passes;
            m.ann.x_std = fm.x_std;
            m.ann.y_std = fm.y_std;
            mlp_train(m.ann, Xtr, Ytr, Xval, Yval, opts.train);

            append_metrics(out.metrics, "ann_std", fm, pre.split,
                           [&](const Matrix& X) { return predict_standard(m.ann, X); });
            append_metrics(out.metrics, "ann_mc", fm, pre.split, [&](const Matrix& X) {
                McPrediction mc = predict_mc(m.ann, m.ann.x_std.apply(X),
                                             m.ann.t_passes, m.ann.seed);
                return destandardize_mean(m.ann, mc.mean);
            });
            out.models.push_back(std::move(m));
        } catch (const std::exception& ex) {
            out.errors.push_back(std::string("ann: ") + ex.what());
        }
    }
    return out;
}

void save_metrics_csv(const std::string& path, const std::vector<ModelMetrics>& metrics) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);

    // One row per (target, split); one column triple per model.
    std::vector<std::string> models, targets, splits;
    for (const ModelMetrics& mm : metrics) {
        if (std::find(models.begin(), models.end(), mm.model) == models.end())
            models.push_back(mm.model);
        if (std::find(splits.begin(), splits.end(), mm.split) == splits.end())
            splits.push_back(mm.split);
        for (const std::string& t : mm.targets)
            if (std::find(targets.begin(), targets.end(), t) == targets.end())
                targets.push_back(t);
    }
    out << "target,split";
    for (const std::string& m : models)
        out << "," << m << "_mae," << m << "_rmse," << m << "_r2";
    out << "\n";
    for (const std::string& tg : targets)
        for (const std::string& sp : splits) {
            out << tg << "," << sp;
            for (const std::string& mo : models) {
                const TargetMetrics* v = nullptr;
                for (const ModelMetrics& mm : metrics) {
                    if (mm.model != mo || mm.split != sp) continue;
                    for (std::size_t t = 0; t < mm.targets.size(); ++t)
                        if (mm.targets[t] == tg) v = &mm.per_target[t];
                }
                if (v)
                    out << "," << format_double(v->mae) << "," << format_double(v->rmse)
                        << "," << (v->r2_defined ? format_double(v->r2) : "nan");
                else
                    out << ",,,";
            }
            out << "\n";
        }
}

}  // namespace shipperf
