#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "shipperf/fouling.hpp"

using namespace shipperf;

namespace {

ShipConfig test_ship() {
    ShipConfig c;
    c.service_speed = 15.5;
    c.ballast_draft = 6.0;
    c.displacement_table = {{4, 5, 6, 7, 8, 9},
                            {20000, 25000, 30000, 35000, 40000, 45000}};
    c.wetted_surface_table = {{4, 0, 6000}, {9, 0, 8200}};
    return c;
}

VoyageSample make_sample(UtcSeconds t, double speed_kn, double draft, double power) {
    VoyageSample s;
    s.timestamp = t;
    s.gps_speed = speed_kn;
    s.log_speed = speed_kn;
    s.draft_fore = draft;
    s.draft_aft = draft;
    s.shaft_power = power;
    s.shaft_rpm = 80;
    return s;
}

}  // namespace

TEST_CASE("near-calm filter applies strict bounds") {
    std::vector<VoyageSample> samples(4);
    samples[0].long_wind_speed = 3.3;
    samples[0].trans_wind_speed = 4.39;  // |wind| just below 5.5
    samples[0].sig_wave_height = 0.99;
    samples[1].long_wind_speed = 3.3;
    samples[1].trans_wind_speed = 4.4;  // |wind| == 5.5 exactly
    samples[1].sig_wave_height = 0.5;
    samples[2].sig_wave_height = 1.0;  // Hs == 1 exactly
    samples[3].long_wind_speed = -5.6;  // magnitude counts, not sign
    std::vector<bool> mask = near_calm_filter(samples);
    CHECK(mask[0]);
    CHECK(!mask[1]);
    CHECK(!mask[2]);
    CHECK(!mask[3]);
}

TEST_CASE("near-calm power correction subtracts the environment demand") {
    ShipConfig c = test_ship();
    ResistanceEstimators est = default_estimators(c);
    VoyageSample s = make_sample(0, 13, 6, 6000);
    s.long_wind_speed = 4.0;
    s.sig_wave_height = 0.8;
    double v = s.log_speed * kKnotsToMps;
    double expect =
        s.shaft_power - (est.wind(s) + est.wave(s)) * v / c.propulsive_efficiency / 1000.0;
    bool floored = true;
    CHECK(correct_power_near_calm(s, c, est, &floored) == doctest::Approx(expect));
    CHECK(!floored);

    // An outsized environment estimate hits the 5% floor.
    VoyageSample heavy = s;
    heavy.shaft_power = 100;
    heavy.sig_wave_height = 5.0;
    double got = correct_power_near_calm(heavy, c, est, &floored);
    CHECK(got == doctest::Approx(5.0));
    CHECK(floored);

    ShipConfig bad = c;
    bad.propulsive_efficiency = 0;
    CHECK_THROWS_AS(correct_power_near_calm(s, bad, est), ConfigError);
}

TEST_CASE("admiralty fit recovers the generating exponents") {
    ShipConfig c = test_ship();
    ResistanceEstimators est = default_estimators(c);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ud(4, 9), uv(8, 16);
    std::normal_distribution<double> g(0, 1);

    std::vector<VoyageSample> clean, noisy;
    for (int i = 0; i < 300; ++i) {
        double draft = ud(rng);
        double v = uv(rng);
        double p = 0.002 * std::pow(c.displacement(draft), 2.0 / 3.0) * std::pow(v, 3);
        clean.push_back(make_sample(900 * i, v, draft, p));
        VoyageSample n = clean.back();
        n.shaft_power = p * std::exp(0.05 * g(rng));
        noisy.push_back(n);
    }
    std::vector<bool> mask(clean.size(), true);

    AdmiraltyModel exact = fit_admiralty_exponents(clean, mask, c, est);
    CHECK(exact.m_exp == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(exact.n_exp == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(exact.r2 == doctest::Approx(1.0));
    CHECK(exact.samples_used == 300);
    // Coefficient inverts the generating law.
    CHECK(exact.coefficient(30000, 12, 0.002 * std::pow(30000, 2.0 / 3.0) * 1728) ==
          doctest::Approx(1.0 / 0.002).epsilon(1e-6));

    AdmiraltyModel rough = fit_admiralty_exponents(noisy, mask, c, est);
    CHECK(std::abs(rough.m_exp - 2.0 / 3.0) < 0.1);
    CHECK(std::abs(rough.n_exp - 3.0) < 0.1);
}

TEST_CASE("admiralty fit error cases") {
    ShipConfig c = test_ship();
    ResistanceEstimators est = default_estimators(c);
    std::vector<VoyageSample> few = {make_sample(0, 12, 6, 5000)};
    std::vector<bool> mask = {true};
    CHECK_THROWS_AS(fit_admiralty_exponents(few, mask, c, est), DataError);

    std::vector<VoyageSample> flat;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uv(8, 16);
    for (int i = 0; i < 100; ++i) {
        double v = uv(rng);
        flat.push_back(make_sample(900 * i, v, 6, 5.0 * v * v * v));
    }
    std::vector<bool> all(flat.size(), true);
    CHECK_THROWS_AS(fit_admiralty_exponents(flat, all, c, est), DataError);
}

TEST_CASE("voyage series segments on long static stretches") {
    ShipConfig c = test_ship();
    ResistanceEstimators est = default_estimators(c);
    AdmiraltyModel ac;
    ac.m_exp = 2.0 / 3.0;
    ac.n_exp = 3.0;

    const double p = 5000;
    std::vector<VoyageSample> samples;
    auto push = [&](int i, double speed) {
        samples.push_back(make_sample(1600000000 + 900LL * i, speed, 6, p));
    };
    for (int i = 0; i < 20; ++i) push(i, 12);    // voyage 1
    for (int i = 20; i < 50; ++i) push(i, 0);    // port, 7.5 h
    for (int i = 50; i < 70; ++i) push(i, 12);   // voyage 2
    for (int i = 70; i < 100; ++i) push(i, 0);   // port
    for (int i = 100; i < 103; ++i) push(i, 12); // too short, skipped

    std::vector<bool> valid(samples.size(), true);
    VoyageSeries series = voyage_admiralty_series(samples, ac, valid, c, est);
    REQUIRE(series.points.size() == 2);
    CHECK(series.skipped_voyages == 1);
    CHECK(series.points[0].cumulative_static_hours == doctest::Approx(0.0));
    CHECK(series.points[1].cumulative_static_hours == doctest::Approx(7.5));
    double expect = std::pow(30000.0, 2.0 / 3.0) * std::pow(12.0, 3) / p;
    CHECK(series.points[0].mean_admiralty == doctest::Approx(expect));
    CHECK(series.points[1].mean_admiralty == doctest::Approx(expect));
    CHECK(series.points[0].samples == 20);
}

TEST_CASE("leg trends replace abnormal legs with the minimum positive rate") {
    VoyageSeries series;
    auto add = [&](UtcSeconds start, double x, double y) {
        VoyagePoint p;
        p.start = start;
        p.cumulative_static_hours = x;
        p.mean_admiralty = y;
        series.points.push_back(p);
    };
    // Leg 0: slope -0.01 from value 5 -> fgr 0.002.
    for (int i = 0; i < 3; ++i) add(100 * i, 10.0 * i, 5.0 - 0.1 * i);
    // Leg 1: improving (positive slope) -> abnormal.
    for (int i = 0; i < 3; ++i) add(1000 + 100 * i, 50.0 + 10.0 * i, 4.0 + 0.1 * i);
    // Leg 2: slope -0.04 from value 8 -> fgr 0.005.
    for (int i = 0; i < 3; ++i) add(2000 + 100 * i, 100.0 + 10.0 * i, 8.0 - 0.4 * i);

    std::vector<CleaningEvent> events = {{1000, CleaningKind::Hull},
                                         {2000, CleaningKind::Propeller}};
    std::vector<LegTrend> trends = fit_leg_trends(series, events);
    REQUIRE(trends.size() == 3);
    CHECK(!trends[0].replaced);
    CHECK(trends[0].slope == doctest::Approx(-0.01));
    CHECK(trends[0].start_value == doctest::Approx(5.0));
    CHECK(trends[0].fgr == doctest::Approx(0.002));
    CHECK(trends[1].replaced);
    CHECK(trends[1].fgr == doctest::Approx(0.002));  // minimum positive rate
    CHECK(trends[2].fgr == doctest::Approx(0.005));

    // A single-point leg is under-sampled and replaced too.
    VoyageSeries sparse = series;
    sparse.points.erase(sparse.points.begin() + 7, sparse.points.begin() + 9);
    std::vector<LegTrend> t2 = fit_leg_trends(sparse, events);
    CHECK(t2[2].replaced);
    CHECK(t2[2].fgr == doctest::Approx(0.002));

    // All legs improving: nothing to fall back on.
    VoyageSeries up;
    for (int i = 0; i < 4; ++i) {
        VoyagePoint p;
        p.start = 100 * i;
        p.cumulative_static_hours = 10.0 * i;
        p.mean_admiralty = 4.0 + 0.1 * i;
        up.points.push_back(p);
    }
    CHECK_THROWS_AS(fit_leg_trends(up, {}), ModelError);
}

TEST_CASE("fouling growth accumulates static time and resets per kind") {
    const UtcSeconds t0 = 1600000000;
    std::vector<VoyageSample> samples;
    for (int i = 0; i < 50; ++i) {
        bool moving = (i >= 10 && i < 20) || (i >= 30 && i < 40);
        samples.push_back(make_sample(t0 + 3600LL * i, moving ? 12 : 0, 6, 5000));
    }
    std::vector<CleaningEvent> events = {
        {t0 + 25 * 3600 + 100, CleaningKind::Hull},
        {t0 + 35 * 3600, CleaningKind::Propeller}};
    std::vector<double> fgr = {0.01, 0.02, 0.03};

    FoulingSeries f = compute_fgf(samples, events, fgr, 3.0);
    REQUIRE(f.timestamps.size() == 50);
    CHECK(f.hull_fgf[0] == 0.0);
    CHECK(f.hull_fgf[10] == doctest::Approx(0.1));  // ten static hours at 0.01
    CHECK(f.prop_fgf[10] == doctest::Approx(0.1));
    // Hull cleaning lands between samples 25 and 26: reset at sample 26.
    CHECK(f.hull_fgf[25] > 0.0);
    CHECK(f.hull_fgf[26] == 0.0);
    CHECK(f.prop_fgf[26] > 0.0);
    // After the event the second leg's rate applies.
    CHECK(f.hull_fgf[29] == doctest::Approx(3 * 0.02));
    CHECK(f.prop_fgf[29] == doctest::Approx(0.1 + 6 * 0.01 + 3 * 0.02));
    // Propeller cleaning exactly at sample 35 resets the propeller only.
    CHECK(f.prop_fgf[35] == 0.0);
    CHECK(f.hull_fgf[35] == doctest::Approx(4 * 0.02));
    // Third leg accumulates at its own rate; total stays the sum of parts.
    CHECK(f.hull_fgf[49] == doctest::Approx(4 * 0.02 + 9 * 0.03));
    CHECK(f.prop_fgf[49] == doctest::Approx(9 * 0.03));
    for (std::size_t i = 0; i < f.timestamps.size(); ++i) {
        CHECK(f.total_fgf[i] == doctest::Approx(f.hull_fgf[i] + f.prop_fgf[i]));
        CHECK(f.hull_fgf[i] >= 0.0);
        CHECK(f.prop_fgf[i] >= 0.0);
    }

    // Instant lookups use the sample at or before the query.
    CHECK(f.total_at(t0 + 26 * 3600 + 5) == f.total_fgf[26]);
    CHECK(f.hull_at(t0 + 49 * 3600) == f.hull_fgf[49]);
    CHECK_THROWS_AS(f.total_at(t0 - 1), DataError);

    CHECK_THROWS_AS(compute_fgf(samples, events, {0.01}, 3.0), ModelError);
}

TEST_CASE("delta-cf vanishes when the model explains the measured power") {
    ShipConfig c = test_ship();
    ResistanceEstimators est = default_estimators(c);
    CalmResistanceFn calm = [&c](const VoyageSample& s) {
        double v = s.log_speed * kKnotsToMps;
        return 0.05 * std::pow(c.displacement(s.mean_draft()), 2.0 / 3.0) * v * v;
    };
    VoyageSample s = make_sample(0, 14, 6, 0);
    s.long_wind_speed = 3.0;
    s.sig_wave_height = 0.6;
    double v = s.log_speed * kKnotsToMps;
    double r = calm(s) + est.wind(s) + est.wave(s);
    s.shaft_power = r * v / c.propulsive_efficiency / 1000.0;

    DeltaCfSample d = delta_cf(s, c, est, calm);
    CHECK(std::abs(d.delta_cf) < 1e-12 * d.c_t_data);
    CHECK(d.c_t_data == doctest::Approx(d.c_t_emp));
    CHECK(!d.extrapolated_surface);
    CHECK(d.r_wind == doctest::Approx(est.wind(s)));

    VoyageSample shallow = s;
    shallow.draft_fore = shallow.draft_aft = 3.0;  // below the surface table
    CHECK(delta_cf(shallow, c, est, calm).extrapolated_surface);

    VoyageSample stopped = s;
    stopped.log_speed = 0;
    CHECK_THROWS_AS(delta_cf(stopped, c, est, calm), DataError);
}

TEST_CASE("power change across an event follows the coefficient shift") {
    ShipConfig c = test_ship();
    const UtcSeconds t_event = 1600000000;
    CleaningEvent event{t_event, CleaningKind::HullAndPropeller};
    std::vector<DeltaCfSample> series;
    for (int i = 0; i < 20; ++i) {
        DeltaCfSample s;
        s.timestamp = t_event - 86400LL * 10 + 3600LL * i;
        s.delta_cf = 1.0e-3;
        series.push_back(s);
    }
    for (int i = 0; i < 20; ++i) {
        DeltaCfSample s;
        s.timestamp = t_event + 86400LL * 3 + 3600LL * i;
        s.delta_cf = 0.6e-3;
        series.push_back(s);
    }
    double got = delta_power_from_delta_cf(series, event, c);
    double s_ref = c.wetted_surface(c.ballast_draft, 0.0);
    double v = c.service_speed * kKnotsToMps;
    double expect = (0.6e-3 - 1.0e-3) * 0.5 * c.water_density * s_ref * v * v * v /
                    c.propulsive_efficiency / 1000.0;
    CHECK(got == doctest::Approx(expect));
    CHECK(got < 0.0);  // cleaning improved the demand

    // Windows with too few samples on either side are rejected.
    std::vector<DeltaCfSample> before_only(series.begin(), series.begin() + 20);
    CHECK_THROWS_AS(delta_power_from_delta_cf(before_only, event, c), DataError);
    std::vector<DeltaCfSample> after_only(series.begin() + 20, series.end());
    CHECK_THROWS_AS(delta_power_from_delta_cf(after_only, event, c), DataError);
}

TEST_CASE("fouling and delta-cf csv roundtrips") {
    FoulingSeries f;
    for (int i = 0; i < 5; ++i) {
        f.timestamps.push_back(1600000000 + 900LL * i);
        f.hull_fgf.push_back(0.1 * i);
        f.prop_fgf.push_back(0.05 * i);
        f.total_fgf.push_back(0.15 * i);
    }
    std::string path = "/tmp/shipperf_fouling.csv";
    save_fouling_csv(path, f);
    FoulingSeries back = load_fouling_csv(path);
    REQUIRE(back.timestamps.size() == 5);
    CHECK(back.timestamps[3] == f.timestamps[3]);
    CHECK(back.hull_fgf[3] == doctest::Approx(f.hull_fgf[3]));
    CHECK(back.total_fgf[4] == doctest::Approx(f.total_fgf[4]));
    std::remove(path.c_str());

    std::vector<DeltaCfSample> d(3);
    for (int i = 0; i < 3; ++i) {
        d[static_cast<std::size_t>(i)].timestamp = 1600000000 + 900LL * i;
        d[static_cast<std::size_t>(i)].c_t_data = 2e-3 + 1e-4 * i;
        d[static_cast<std::size_t>(i)].c_t_emp = 1.5e-3;
        d[static_cast<std::size_t>(i)].delta_cf =
            d[static_cast<std::size_t>(i)].c_t_data - 1.5e-3;
    }
    path = "/tmp/shipperf_delta_cf.csv";
    save_delta_cf_csv(path, d);
    std::vector<DeltaCfSample> dback = load_delta_cf_csv(path);
    REQUIRE(dback.size() == 3);
    CHECK(dback[2].delta_cf == doctest::Approx(d[2].delta_cf));
    CHECK(dback[1].c_t_data == doctest::Approx(d[1].c_t_data));
    std::remove(path.c_str());
}
