#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "shipperf/fouling.hpp"
#include "shipperf/synth.hpp"

using namespace shipperf;

namespace {

SynthScenario quiet_scenario() {
    SynthScenario sc;
    sc.duration_days = 120;
    sc.sample_interval_s = 900;
    sc.hull_penalty_rate = 1e-4;
    sc.prop_penalty_rate = 5e-5;
    sc.power_noise_kw = 0;
    sc.speed_noise_kn = 0;
    sc.seed = 11;
    sc.ship.displacement_table = {{4.0, 6.0, 9.0, 11.0},
                                  {20000.0, 30000.0, 45000.0, 52000.0}};
    sc.ship.wetted_surface_table = {
        {4.0, 0.0, 6000.0}, {6.0, 0.0, 7000.0}, {9.0, 0.0, 8200.0}, {11.0, 0.0, 9000.0}};
    sc.events = {
        {sc.start_time + 40LL * 86400, CleaningKind::Hull},
        {sc.start_time + 80LL * 86400, CleaningKind::HullAndPropeller}};
    return sc;
}

double static_hours_between(const SynthResult& res, UtcSeconds lo, UtcSeconds hi,
                            double dt_h) {
    double h = 0;
    for (const auto& s : res.samples)
        if (s.timestamp >= lo && s.timestamp < hi && s.log_speed < 3.0) h += dt_h;
    return h;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
    SynthScenario sc = quiet_scenario();
    SynthResult a = generate(sc);
    SynthResult b = generate(sc);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].shaft_power == b.samples[i].shaft_power);
        CHECK(a.samples[i].gps_speed == b.samples[i].gps_speed);
        CHECK(a.samples[i].sig_wave_height == b.samples[i].sig_wave_height);
    }
    CHECK(a.truth.event_delta_power_kw == b.truth.event_delta_power_kw);

    sc.seed = 12;
    SynthResult c = generate(sc);
    bool differs = false;
    for (std::size_t i = 0; i < a.samples.size() && !differs; ++i)
        differs = a.samples[i].shaft_power != c.samples[i].shaft_power;
    CHECK(differs);
}

TEST_CASE("sample counts, truth sizes, and schedule shape") {
    SynthScenario sc = quiet_scenario();
    SynthResult res = generate(sc);
    const auto n = static_cast<std::size_t>(120.0 * 86400 / 900);
    CHECK(res.samples.size() == n);
    CHECK(res.truth.fouling_multiplier.size() == n);
    CHECK(res.truth.calm_power_at_service.size() == n);
    CHECK(res.truth.event_delta_power_kw.size() == 2);
    CHECK(res.truth.displacement_ref == doctest::Approx(30000.0));
    // Both sailing and port phases occur; port samples draw no power.
    std::size_t sailing = 0, port = 0;
    for (const auto& s : res.samples) {
        if (s.log_speed >= 3) {
            ++sailing;
            CHECK(s.shaft_power > 0);
        } else {
            ++port;
            CHECK(s.shaft_power == 0.0);
            CHECK(s.shaft_rpm == 0.0);
        }
    }
    CHECK(sailing > n / 4);
    CHECK(port > n / 20);
}

TEST_CASE("noiseless corrected power matches the closed-form calm law") {
    SynthScenario sc = quiet_scenario();
    SynthResult res = generate(sc);
    ResistanceEstimators est = default_estimators(sc.ship);
    for (std::size_t i = 0; i < res.samples.size(); i += 7) {
        const VoyageSample& s = res.samples[i];
        if (s.log_speed < 3) continue;
        double corrected = correct_power_near_calm(s, sc.ship, est);
        double disp = sc.ship.displacement(s.mean_draft());
        double trim_factor = 1.0 + 0.12 * ((s.draft_aft - s.draft_fore) - 0.25);
        double expect = sc.calm_coeff * std::pow(disp, 2.0 / 3.0) *
                        std::pow(s.log_speed, 3) * trim_factor *
                        res.truth.fouling_multiplier[i] /
                        sc.ship.propulsive_efficiency;
        CHECK(corrected == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("fouling multiplier starts clean and drops at cleanings") {
    SynthScenario sc = quiet_scenario();
    SynthResult res = generate(sc);
    CHECK(res.truth.fouling_multiplier.front() == 1.0);
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
        CHECK(res.truth.fouling_multiplier[i] >= 1.0);
        CHECK(res.truth.calm_power_at_service[i] ==
              doctest::Approx(res.truth.fouling_multiplier[i] *
                              res.truth.calm_power_at_service.front()));
    }
    // The full cleaning at day 80 removes everything accumulated so far.
    auto at = [&](UtcSeconds t) {
        for (std::size_t i = 0; i < res.samples.size(); ++i)
            if (res.samples[i].timestamp == t) return res.truth.fouling_multiplier[i];
        FAIL("sample not found");
        return 0.0;
    };
    CHECK(at(sc.events[1].timestamp) == doctest::Approx(1.0));
    CHECK(at(sc.events[1].timestamp - 900) > 1.0);
}

TEST_CASE("event truth equals the removed penalty at service speed") {
    SynthScenario sc = quiet_scenario();
    SynthResult res = generate(sc);
    const double dt_h = 0.25;
    const double ref_factor = sc.calm_coeff * std::pow(30000.0, 2.0 / 3.0) *
                              std::pow(sc.ship.service_speed, 3) /
                              sc.ship.propulsive_efficiency;
    UtcSeconds e1 = sc.events[0].timestamp, e2 = sc.events[1].timestamp;

    double hull_h1 = static_hours_between(res, 0, e1, dt_h);
    CHECK(truth_delta_power(res, res.events[0]) ==
          doctest::Approx(-sc.hull_penalty_rate * hull_h1 * ref_factor));

    double hull_h2 = static_hours_between(res, e1, e2, dt_h);
    double prop_h2 = static_hours_between(res, 0, e2, dt_h);
    double expect2 = -(sc.hull_penalty_rate * hull_h2 +
                       sc.prop_penalty_rate * prop_h2) * ref_factor;
    CHECK(truth_delta_power(res, res.events[1]) == doctest::Approx(expect2));
    CHECK(truth_delta_power(res, res.events[1]) < 0);

    CleaningEvent unknown{12345, CleaningKind::Hull};
    CHECK_THROWS_AS(truth_delta_power(res, unknown), DataError);
}

TEST_CASE("scenario validation") {
    SynthScenario sc = quiet_scenario();
    sc.duration_days = 0;
    CHECK_THROWS_AS(generate(sc), ConfigError);
    sc = quiet_scenario();
    sc.hull_penalty_rate = -1;
    CHECK_THROWS_AS(generate(sc), ConfigError);
    sc = quiet_scenario();
    sc.port_days_min = 3;
    sc.port_days_max = 1;
    CHECK_THROWS_AS(generate(sc), ConfigError);
}

TEST_CASE("truth json is written") {
    SynthScenario sc = quiet_scenario();
    sc.duration_days = 10;
    sc.events.clear();
    SynthResult res = generate(sc);
    std::string path = "/tmp/shipperf_truth.json";
    save_truth_json(path, res);
    std::ifstream in(path);
    std::string body((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(body.find("displacement_ref") != std::string::npos);
    CHECK(body.find("fouling_multiplier") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("scenario file parsing") {
    std::string path = "/tmp/shipperf_scenario.cfg";
    {
        std::ofstream out(path);
        out << "# demo scenario\n"
            << "start_time = 2020-01-01T00:00:00Z\n"
            << "duration_days = 30\n"
            << "sample_interval_s = 600\n"
            << "calm_coeff = 0.004\n"
            << "hull_penalty_rate = 0.0002\n"
            << "seed = 7\n"
            << "events = 2020-01-10T00:00:00Z:Hull,2020-01-20T12:00:00Z:HullAndPropeller\n"
            << "ship.service_speed = 14\n"
            << "ship.displacement_table = 4:21000,9:46000\n";
    }
    SynthScenario sc = load_scenario(path);
    CHECK(sc.start_time == parse_iso8601("2020-01-01T00:00:00Z"));
    CHECK(sc.duration_days == 30.0);
    CHECK(sc.sample_interval_s == 600);
    CHECK(sc.calm_coeff == 0.004);
    CHECK(sc.hull_penalty_rate == 0.0002);
    CHECK(sc.seed == 7);
    REQUIRE(sc.events.size() == 2);
    CHECK(sc.events[1].kind == CleaningKind::HullAndPropeller);
    CHECK(sc.ship.service_speed == 14.0);
    CHECK(sc.ship.displacement_table.x == std::vector<double>{4, 9});
    CHECK(sc.ship.displacement_table.y[1] == 46000.0);
    // Missing wetted-surface table falls back to the built-in default.
    CHECK(!sc.ship.wetted_surface_table.empty());

    {
        std::ofstream out(path);
        out << "events = not-a-timestamp\n";
    }
    CHECK_THROWS_AS(load_scenario(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_scenario("/tmp/shipperf_no_such.cfg"), ConfigError);
}
