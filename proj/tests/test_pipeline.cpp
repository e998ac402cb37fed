#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "shipperf/pipeline.hpp"
#include "shipperf/serialize.hpp"
#include "shipperf/synth.hpp"

using namespace shipperf;

namespace {

SynthScenario pipeline_scenario() {
    SynthScenario sc;
    sc.duration_days = 730;
    sc.sample_interval_s = 1800;
    sc.calm_coeff = 0.0005;
    sc.hull_penalty_rate = 1e-5;
    sc.prop_penalty_rate = 5e-6;
    sc.power_noise_kw = 20;
    sc.speed_noise_kn = 0.05;
    sc.wind_sigma = 3.0;
    sc.wave_sigma = 0.8;
    sc.current_sigma_kn = 0.3;
    sc.cruise_speeds_kn = {14.5, 15.5, 16.5};
    sc.cruise_speed_weights = {1, 2, 1};
    sc.seed = 404;
    sc.events = {{sc.start_time + 240LL * 86400, CleaningKind::Hull},
                 {sc.start_time + 480LL * 86400, CleaningKind::HullAndPropeller}};
    return sc;
}

const SynthResult& generated() {
    static SynthResult res = generate(pipeline_scenario());
    return res;
}

PreprocessOptions preprocess_opts() {
    PreprocessOptions opts;
    opts.split.with_validation = true;
    return opts;
}

const PreprocessResult& preprocessed() {
    static PreprocessResult res = [] {
        const SynthResult& gen = generated();
        ShipConfig ship = pipeline_scenario().ship;
        // The generator fills empty lookup tables with its defaults.
        ship.displacement_table = {{4.0, 6.0, 9.0, 11.0},
                                   {20000.0, 30000.0, 45000.0, 52000.0}};
        ship.wetted_surface_table = {{4.0, 0.0, 6000.0},
                                     {6.0, 0.0, 7000.0},
                                     {9.0, 0.0, 8200.0},
                                     {11.0, 0.0, 9000.0}};
        return run_preprocess(gen.samples, gen.events, ship, preprocess_opts());
    }();
    return res;
}

CalibrateOptions quick_calibrate_opts() {
    CalibrateOptions opts;
    opts.max_A = 6;
    opts.hidden_units = 8;
    opts.t_passes = 50;
    opts.train.epochs = 30;
    return opts;
}

}  // namespace

TEST_CASE("preprocess produces aligned, filtered artifacts") {
    const PreprocessResult& pre = preprocessed();
    const std::size_t m = pre.samples.size();
    REQUIRE(m > 0);
    CHECK(pre.steady_mask.size() == m);
    CHECK(pre.near_calm_mask.size() == m);
    CHECK(pre.fouling.timestamps.size() == m);
    for (std::size_t i = 1; i < m; ++i)
        CHECK(pre.samples[i].timestamp > pre.samples[i - 1].timestamp);

    // Admiralty exponents close to the generator's (2/3, 3) law.
    CHECK(std::abs(pre.admiralty.m_exp - 2.0 / 3.0) < 0.3);
    CHECK(std::abs(pre.admiralty.n_exp - 3.0) < 0.3);
    CHECK(pre.admiralty.r2 > 0.95);
    CHECK(pre.voyages.points.size() >= 6);
    CHECK(pre.leg_trends.size() == 3);
    for (const LegTrend& t : pre.leg_trends) CHECK(t.fgr > 0);

    // Hindcast current check is meaningful on this data.
    CHECK(pre.hindcast.current_correlation_defined);
    CHECK(pre.hindcast.current_correlation > 0.8);

    CHECK(!pre.delta_cf.empty());
    const int rows = static_cast<int>(pre.features_nl.X.rows());
    CHECK(rows >= 100);
    CHECK(pre.features_nl.X.cols() == 13);
    CHECK(pre.features_lin.X.cols() == 10);
    CHECK(pre.features_nl.Y.cols() == 5);
    CHECK(pre.features_lin.Y.cols() == 3);
    CHECK(pre.features_nl.X.rows() == pre.features_lin.X.rows());

    // Calibration rows are sailing rows with positive power; the fouling
    // column matches the series at the row instant.
    for (int i = 0; i < rows; i += 97) {
        CHECK(pre.features_nl.Y(i, 0) > 0.0);
        CHECK(pre.features_nl.Y(i, 1) > 3.0);
        CHECK(pre.features_nl.Y(i, 2) > 3.0);
        CHECK(pre.features_nl.X(i, 9) ==
              doctest::Approx(pre.fouling.total_at(pre.features_nl.row_timestamps[
                  static_cast<std::size_t>(i)])));
    }

    // Split partitions the rows; standardizers are fitted on train only.
    auto train = pre.split.train_rows();
    auto val = pre.split.validation_rows();
    auto test = pre.split.test_rows();
    CHECK(static_cast<int>(train.size() + val.size() + test.size()) == rows);
    CHECK(!val.empty());
    CHECK(pre.features_nl.x_std.means.size() == 13);
    CHECK(pre.features_lin.y_std.stds.size() == 3);
    for (Eigen::Index j = 0; j < 13; ++j) CHECK(pre.features_nl.x_std.stds[j] > 0);
}

TEST_CASE("calibration fits all three models with sensible metrics") {
    PreprocessResult pre = preprocessed();
    CalibrationResult cal = run_calibrate(pre, quick_calibrate_opts());
    REQUIRE(cal.errors.empty());
    REQUIRE(cal.models.size() == 3);
    CHECK(cal.models[0].kind == ModelKind::Pcr);
    CHECK(cal.models[1].kind == ModelKind::Plsr);
    CHECK(cal.models[2].kind == ModelKind::Ann);
    CHECK(cal.cv_pcr.selected_A >= 1);
    CHECK(cal.cv_plsr.selected_A >= 1);

    // pcr/plsr/ann_std/ann_mc each on train and test.
    CHECK(cal.metrics.size() == 8);
    for (const ModelMetrics& mm : cal.metrics) {
        CHECK(mm.per_target.size() == 3);
        CHECK(mm.targets[0] == "shaft_power");
    }
    // Linear models explain the bulk of the power signal on training data;
    // PLSR's supervised scores reach further than PCR's at the same rank.
    for (const ModelMetrics& mm : cal.metrics) {
        if (mm.split != "train") continue;
        if (mm.model == "plsr") CHECK(mm.per_target[0].r2 > 0.85);
        if (mm.model == "pcr") CHECK(mm.per_target[0].r2 > 0.6);
    }
}

TEST_CASE("one failing model does not take down the others") {
    PreprocessResult pre = preprocessed();
    CalibrateOptions opts = quick_calibrate_opts();
    opts.train.learning_rate = 1e200;  // guarantees overflow to a non-finite loss
    CalibrationResult cal = run_calibrate(pre, opts);
    CHECK(cal.models.size() == 2);
    REQUIRE(cal.errors.size() == 1);
    CHECK(cal.errors[0].rfind("ann:", 0) == 0);
}

TEST_CASE("metrics csv layout") {
    PreprocessResult pre = preprocessed();
    CalibrateOptions opts = quick_calibrate_opts();
    opts.use_ann = false;
    CalibrationResult cal = run_calibrate(pre, opts);
    std::string path = "/tmp/shipperf_metrics.csv";
    save_metrics_csv(path, cal.metrics);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.find("pcr_mae") != std::string::npos);
    CHECK(header.find("plsr_r2") != std::string::npos);
    std::string line;
    std::size_t rows = 0;
    bool has_power_train = false;
    while (std::getline(in, line)) {
        ++rows;
        if (line.rfind("shaft_power,train", 0) == 0) has_power_train = true;
    }
    CHECK(rows == 6);  // 3 targets x 2 splits
    CHECK(has_power_train);
    std::remove(path.c_str());
}

TEST_CASE("model serialization round-trips predictions") {
    PreprocessResult pre = preprocessed();
    CalibrationResult cal = run_calibrate(pre, quick_calibrate_opts());
    REQUIRE(cal.models.size() == 3);
    Provenance prov{"deadbeef", 42};

    Matrix probe_nl = pre.features_nl.X.topRows(25);
    Matrix probe_lin = pre.features_lin.X.topRows(25);
    for (const CalibratedModel& m : cal.models) {
        std::string path = "/tmp/shipperf_model_" + to_string(m.kind) + ".json";
        save_model_json(path, m, prov);
        CalibratedModel back = load_model_json(path);
        CHECK(back.kind == m.kind);
        CHECK(back.nonlinear_features == m.nonlinear_features);
        const Matrix& probe = m.nonlinear_features ? probe_nl : probe_lin;
        Matrix a = m.predict(probe);
        Matrix b = back.predict(probe);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
        std::remove(path.c_str());
    }
}

TEST_CASE("feature and split serialization round-trips") {
    const PreprocessResult& pre = preprocessed();
    Provenance prov{"cafe1234", 7};

    std::string csv = "/tmp/shipperf_features.csv";
    std::string meta = "/tmp/shipperf_features_meta.json";
    save_features(csv, meta, pre.features_nl, prov);
    FeatureMatrix back = load_features(csv, meta);
    CHECK(back.x_names == pre.features_nl.x_names);
    CHECK(back.y_names == pre.features_nl.y_names);
    CHECK(back.X.rows() == pre.features_nl.X.rows());
    CHECK((back.X - pre.features_nl.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.Y - pre.features_nl.Y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.row_timestamps == pre.features_nl.row_timestamps);
    CHECK(back.x_std.means.size() == pre.features_nl.x_std.means.size());
    CHECK((back.x_std.means - pre.features_nl.x_std.means).cwiseAbs().maxCoeff() <
          1e-15);
    std::remove(csv.c_str());
    std::remove(meta.c_str());

    std::string split_path = "/tmp/shipperf_split.json";
    save_split_json(split_path, pre.split, prov);
    SplitPlan plan = load_split_json(split_path);
    CHECK(plan.train_rows() == pre.split.train_rows());
    CHECK(plan.validation_rows() == pre.split.validation_rows());
    CHECK(plan.test_rows() == pre.split.test_rows());
    std::remove(split_path.c_str());
}

TEST_CASE("pipeline reruns are bit-identical") {
    const SynthResult& gen = generated();
    ShipConfig ship = pipeline_scenario().ship;
    ship.displacement_table = {{4.0, 6.0, 9.0, 11.0},
                               {20000.0, 30000.0, 45000.0, 52000.0}};
    ship.wetted_surface_table = {{4.0, 0.0, 6000.0},
                                 {6.0, 0.0, 7000.0},
                                 {9.0, 0.0, 8200.0},
                                 {11.0, 0.0, 9000.0}};
    PreprocessResult a = run_preprocess(gen.samples, gen.events, ship, preprocess_opts());
    PreprocessResult b = run_preprocess(gen.samples, gen.events, ship, preprocess_opts());
    CHECK((a.features_nl.X - b.features_nl.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.admiralty.m_exp == b.admiralty.m_exp);
    CHECK(a.fouling.total_fgf == b.fouling.total_fgf);

    CalibrationResult ca = run_calibrate(a, quick_calibrate_opts());
    CalibrationResult cb = run_calibrate(b, quick_calibrate_opts());
    REQUIRE(ca.models.size() == cb.models.size());
    CHECK((ca.models[0].pcr.coeffs - cb.models[0].pcr.coeffs).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((ca.models[1].plsr.regression - cb.models[1].plsr.regression)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK((mlp_get_params(ca.models[2].ann) - mlp_get_params(cb.models[2].ann))
              .norm() == 0.0);
    CHECK((ca.cv_pcr.press - cb.cv_pcr.press).cwiseAbs().maxCoeff() == 0.0);
}
