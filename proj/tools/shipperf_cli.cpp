#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shipperf/data_io.hpp"
#include "shipperf/hindcast.hpp"
#include "shipperf/pipeline.hpp"
#include "shipperf/serialize.hpp"
#include "shipperf/synth.hpp"

namespace fs = std::filesystem;
using namespace shipperf;

namespace {

struct RunConfig {
    std::map<std::string, std::string> kv;
    std::string config_hash;
    std::string config_dir;

    bool has(const std::string& k) const { return kv.count(k) > 0; }
    std::string str(const std::string& k, const std::string& def = "") const {
        auto it = kv.find(k);
        return it == kv.end() ? def : it->second;
    }
    double num(const std::string& k, double def) const {
        auto it = kv.find(k);
        return it == kv.end() ? def : std::atof(it->second.c_str());
    }
    int integer(const std::string& k, int def) const {
        auto it = kv.find(k);
        return it == kv.end() ? def : std::atoi(it->second.c_str());
    }
    // Relative paths resolve against the config file's directory.
    std::string path(const std::string& k) const {
        std::string p = str(k);
        if (p.empty()) throw ConfigError("config key missing: " + k);
        fs::path fp(p);
        if (fp.is_relative() && !config_dir.empty()) fp = fs::path(config_dir) / fp;
        return fp.string();
    }
};

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream all;
    all << in.rdbuf();
    RunConfig cfg;
    cfg.config_hash = fnv1a_hex(all.str());
    cfg.config_dir = fs::path(path).parent_path().string();
    std::istringstream ss(all.str());
    std::string line;
    while (std::getline(ss, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) cfg.kv[key] = val;
    }
    return cfg;
}

struct Cli {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string models = "pcr,plsr,ann";
};

std::string out_dir_for(const Cli& cli, const RunConfig& cfg) {
    std::string out = !cli.out_dir.empty() ? cli.out_dir : cfg.str("out", "out");
    fs::create_directories(out);
    return out;
}

std::uint64_t seed_for(const Cli& cli, const RunConfig& cfg) {
    if (cli.seed) return *cli.seed;
    return static_cast<std::uint64_t>(
        std::strtoull(cfg.str("seed", "1").c_str(), nullptr, 10));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

Provenance provenance_for(const Cli& cli, const RunConfig& cfg) {
    return Provenance{cfg.config_hash, seed_for(cli, cfg)};
}

// ---- synth -----------------------------------------------------------------

int cmd_synth(const Cli& cli) {
    SynthScenario sc = load_scenario(cli.config_path);
    if (cli.seed) sc.seed = *cli.seed;
    std::string out = !cli.out_dir.empty() ? cli.out_dir : "out";
    fs::create_directories(out);

    SynthResult res = generate(sc);
    save_voyage_csv(out + "/voyages.csv", res.samples);
    save_events(out + "/events.csv", res.events);
    save_ship_config(out + "/ship.cfg", sc.ship);
    save_truth_json(out + "/truth.json", res);
    std::cout << "synth: " << res.samples.size() << " samples, " << res.events.size()
              << " events -> " << out << "\n";
    return 0;
}

// ---- preprocess ------------------------------------------------------------

PreprocessOptions preprocess_options(const RunConfig& cfg) {
    PreprocessOptions opts;
    opts.qs_window = cfg.integer("qs_window", 5);
    opts.qs_rpm_band = cfg.num("qs_rpm_band", 2.0);
    opts.qs_speed_band = cfg.num("qs_speed_band", 0.5);
    opts.static_speed_kn = cfg.num("static_speed_kn", 3.0);
    opts.admiralty.min_samples =
        static_cast<std::size_t>(cfg.integer("admiralty_min_samples", 50));
    opts.voyage.min_port_gap_hours = cfg.num("min_port_gap_hours", 6.0);
    std::string layout = cfg.str("split_layout", "original");
    if (layout == "original") opts.split.layout = SplitLayout::OriginalShip;
    else if (layout == "sister") opts.split.layout = SplitLayout::SisterShip;
    else if (layout == "custom") opts.split.layout = SplitLayout::Custom;
    else throw ConfigError("unknown split_layout: " + layout);
    opts.split.test_fraction = cfg.num("test_fraction", 0.2);
    opts.split.with_validation = cfg.integer("with_validation", 1) != 0;
    return opts;
}

std::vector<VoyageSample> load_input_samples(const RunConfig& cfg) {
    LoadReport rep;
    std::vector<VoyageSample> samples = load_voyage_csv(cfg.path("data"), &rep);
    if (rep.dropped > 0)
        std::cerr << "preprocess: dropped " << rep.dropped << " unparsable rows\n";

    // Optional hindcast merge; merged columns may already be present in the
    // data file (the synthetic generator emits them directly).
    static const char* keys[] = {"hindcast_wind_east",       "hindcast_wind_north",
                                 "hindcast_current_east",    "hindcast_current_north",
                                 "hindcast_sig_wave_height", "hindcast_mean_wave_dir",
                                 "hindcast_mean_wave_period"};
    std::vector<HindcastGrid> grids;
    HindcastSet set;
    const HindcastGrid** slots[] = {&set.wind_east,       &set.wind_north,
                                    &set.current_east,    &set.current_north,
                                    &set.sig_wave_height, &set.mean_wave_dir,
                                    &set.mean_wave_period};
    grids.reserve(7);
    bool any = false;
    for (int i = 0; i < 7; ++i)
        if (cfg.has(keys[i])) {
            grids.push_back(load_hindcast_csv(cfg.path(keys[i]), keys[i] + 9));
            any = true;
        }
    if (any) {
        std::size_t gi = 0;
        for (int i = 0; i < 7; ++i)
            if (cfg.has(keys[i])) *slots[i] = &grids[gi++];
        merge_hindcast(samples, set);
    }
    return samples;
}

int cmd_preprocess(const Cli& cli) {
    RunConfig cfg = load_run_config(cli.config_path);
    std::string out = out_dir_for(cli, cfg);
    Provenance prov = provenance_for(cli, cfg);

    std::string events_path = cfg.path("events");
    if (!fs::exists(events_path))
        throw DataError("events file not found: " + events_path);
    std::vector<CleaningEvent> events = load_events(events_path);
    ShipConfig ship = load_ship_config(cfg.path("ship"));
    std::vector<VoyageSample> samples = load_input_samples(cfg);

    PreprocessResult res = run_preprocess(std::move(samples), events, ship,
                                          preprocess_options(cfg));

    std::vector<VoyageSample> steady;
    for (std::size_t i = 0; i < res.samples.size(); ++i)
        if (res.steady_mask[i]) steady.push_back(res.samples[i]);
    save_voyage_csv(out + "/steady_samples.csv", steady);

    {
        nlohmann::json j;
        j["provenance"] = {{"config_hash", prov.config_hash}, {"seed", prov.seed}};
        j["current_bias_kn"] = res.hindcast.current_bias;
        j["current_rmse_kn"] = res.hindcast.current_rmse;
        j["current_correlation"] = res.hindcast.current_correlation;
        j["current_correlation_defined"] = res.hindcast.current_correlation_defined;
        j["pairs"] = res.hindcast.pairs;
        std::ofstream f(out + "/hindcast_validation.json");
        f << j.dump(1) << '\n';
    }
    {
        nlohmann::json j;
        j["provenance"] = {{"config_hash", prov.config_hash}, {"seed", prov.seed}};
        j["m_exp"] = res.admiralty.m_exp;
        j["n_exp"] = res.admiralty.n_exp;
        j["log_const"] = res.admiralty.log_const;
        j["r2"] = res.admiralty.r2;
        j["residual_std"] = res.admiralty.residual_std;
        j["samples_used"] = res.admiralty.samples_used;
        j["voyages"] = nlohmann::json::array();
        for (const VoyagePoint& p : res.voyages.points)
            j["voyages"].push_back({{"start", format_iso8601(p.start)},
                                    {"end", format_iso8601(p.end)},
                                    {"cumulative_static_hours", p.cumulative_static_hours},
                                    {"mean_admiralty", p.mean_admiralty},
                                    {"samples", p.samples}});
        j["legs"] = nlohmann::json::array();
        for (const LegTrend& t : res.leg_trends)
            j["legs"].push_back({{"slope", t.slope},
                                 {"start_value", t.start_value},
                                 {"fgr", t.fgr},
                                 {"replaced", t.replaced},
                                 {"points", t.points}});
        std::ofstream f(out + "/admiralty.json");
        f << j.dump(1) << '\n';
    }
    save_fouling_csv(out + "/fouling.csv", res.fouling);
    save_delta_cf_csv(out + "/delta_cf.csv", res.delta_cf);
    save_features(out + "/features_nl.csv", out + "/features_nl_meta.json",
                  res.features_nl, prov);
    save_features(out + "/features_lin.csv", out + "/features_lin_meta.json",
                  res.features_lin, prov);
    save_split_json(out + "/split.json", res.split, prov);

    nlohmann::json manifest;
    manifest["config_hash"] = prov.config_hash;
    manifest["seed"] = prov.seed;
    manifest["artifacts"] = nlohmann::json::array();
    for (const char* name :
         {"steady_samples.csv", "hindcast_validation.json", "admiralty.json",
          "fouling.csv", "delta_cf.csv", "features_nl.csv", "split.json"})
        manifest["artifacts"].push_back(
            {{"name", name}, {"hash", hash_file(out + "/" + name)}});
    manifest["auxiliary"] = nlohmann::json::array();
    for (const char* name :
         {"features_nl_meta.json", "features_lin.csv", "features_lin_meta.json"})
        manifest["auxiliary"].push_back(
            {{"name", name}, {"hash", hash_file(out + "/" + name)}});
    for (const std::string& w : res.split.warnings) std::cerr << "warning: " << w << "\n";
    std::ofstream f(out + "/manifest.json");
    f << manifest.dump(1) << '\n';
    std::cout << "preprocess: " << res.features_nl.X.rows() << " calibration rows -> "
              << out << "\n";
    return 0;
}

// ---- calibrate -------------------------------------------------------------

CalibrateOptions calibrate_options(const Cli& cli, const RunConfig& cfg) {
    CalibrateOptions opts;
    std::vector<std::string> models = split_list(cli.models);
    opts.use_pcr = opts.use_plsr = opts.use_ann = false;
    for (const std::string& m : models) {
        if (m == "pcr") opts.use_pcr = true;
        else if (m == "plsr") opts.use_plsr = true;
        else if (m == "ann") opts.use_ann = true;
        else throw ConfigError("unknown model in --models: " + m);
    }
    opts.folds = cfg.integer("folds", 20);
    opts.max_A = cfg.integer("max_A", 0);
    opts.cv_threshold = cfg.num("cv_threshold", 0.9);
    opts.hidden_units = cfg.integer("hidden_units", 50);
    opts.hidden_layers = cfg.integer("hidden_layers", 1);
    opts.p_drop = cfg.num("p_drop", 0.2);
    opts.tau = cfg.num("tau", 1.0);
    opts.length_scale = cfg.num("length_scale", 10.0);
    opts.t_passes = cfg.integer("t_passes", 10000);
    opts.seed = seed_for(cli, cfg);
    opts.train.epochs = cfg.integer("epochs", 2000);
    opts.train.batch_frac = cfg.num("batch_frac", 0.05);
    opts.train.learning_rate = cfg.num("learning_rate", 0.01);
    return opts;
}

int cmd_calibrate(const Cli& cli) {
    RunConfig cfg = load_run_config(cli.config_path);
    std::string out = out_dir_for(cli, cfg);
    Provenance prov = provenance_for(cli, cfg);

    PreprocessResult pre;
    pre.features_nl = load_features(out + "/features_nl.csv", out + "/features_nl_meta.json");
    pre.features_lin = load_features(out + "/features_lin.csv", out + "/features_lin_meta.json");
    pre.split = load_split_json(out + "/split.json");

    CalibrationResult res = run_calibrate(pre, calibrate_options(cli, cfg));
    for (const CalibratedModel& m : res.models)
        save_model_json(out + "/model_" + to_string(m.kind) + ".json", m, prov);
    for (const CalibratedModel& m : res.models) {
        if (m.kind == ModelKind::Pcr) {
            save_cv_report_json(out + "/cv_pcr.json", res.cv_pcr, prov);
            save_cv_report_csv(out + "/cv_pcr.csv", res.cv_pcr);
        } else if (m.kind == ModelKind::Plsr) {
            save_cv_report_json(out + "/cv_plsr.json", res.cv_plsr, prov);
            save_cv_report_csv(out + "/cv_plsr.csv", res.cv_plsr);
        }
    }
    save_metrics_csv(out + "/metrics.csv", res.metrics);
    for (const std::string& e : res.errors) std::cerr << "error: " << e << "\n";
    if (res.models.empty()) throw ModelError("no model could be calibrated");
    std::cout << "calibrate: " << res.models.size() << " models -> " << out << "\n";
    return 0;
}

// ---- trend / report / curve ------------------------------------------------

std::vector<CalibratedModel> load_models(const Cli& cli, const std::string& out) {
    std::vector<CalibratedModel> models;
    for (const std::string& m : split_list(cli.models)) {
        std::string path = out + "/model_" + m + ".json";
        if (fs::exists(path)) models.push_back(load_model_json(path));
    }
    if (models.empty()) throw ModelError("no calibrated model files found in " + out);
    return models;
}

std::vector<UtcSeconds> daily_timeline(const FoulingSeries& fouling, double step_days) {
    if (fouling.timestamps.empty()) throw DataError("empty fouling series");
    auto step = static_cast<UtcSeconds>(step_days * 86400.0);
    std::vector<UtcSeconds> tl;
    for (UtcSeconds t = fouling.timestamps.front(); t <= fouling.timestamps.back();
         t += step)
        tl.push_back(t);
    return tl;
}

DeltaPowerCurveOptions curve_options(const RunConfig& cfg, const ShipConfig& ship) {
    DeltaPowerCurveOptions opts;
    opts.step_seconds = cfg.num("event_step_days", 1.0) * 86400.0;
    opts.rpm_min = cfg.num("curve_rpm_min", 0.4 * ship.ncr_rpm);
    opts.rpm_max = cfg.num("curve_rpm_max", 1.1 * ship.ncr_rpm);
    opts.n_points = cfg.integer("curve_points", 25);
    opts.mean_draft = cfg.num("curve_draft", ship.ballast_draft);
    return opts;
}

int cmd_trend(const Cli& cli) {
    RunConfig cfg = load_run_config(cli.config_path);
    std::string out = out_dir_for(cli, cfg);
    ShipConfig ship = load_ship_config(cfg.path("ship"));
    FoulingSeries fouling = load_fouling_csv(out + "/fouling.csv");
    std::vector<CalibratedModel> models = load_models(cli, out);

    TrendScenario sc;
    sc.rpm = cfg.num("trend_rpm", ship.ncr_rpm);
    sc.mean_draft = cfg.num("trend_draft", ship.ballast_draft);
    sc.timeline = daily_timeline(fouling, cfg.num("trend_step_days", 1.0));
    sc.fouling = &fouling;

    for (const CalibratedModel& m : models) {
        TrendSeries t = predict_trends(m, sc);
        save_trend_csv(out + "/trend_" + to_string(m.kind) + ".csv", t);
        if (t.clamped_negative_cube)
            std::cerr << "warning: " << to_string(m.kind)
                      << " trend clamped negative cubed speeds\n";
    }
    std::cout << "trend: " << sc.timeline.size() << " steps -> " << out << "\n";
    return 0;
}

int cmd_report(const Cli& cli) {
    RunConfig cfg = load_run_config(cli.config_path);
    std::string out = out_dir_for(cli, cfg);
    ShipConfig ship = load_ship_config(cfg.path("ship"));
    std::vector<CleaningEvent> events = load_events(cfg.path("events"));
    FoulingSeries fouling = load_fouling_csv(out + "/fouling.csv");
    std::vector<DeltaCfSample> dcf = load_delta_cf_csv(out + "/delta_cf.csv");
    std::vector<CalibratedModel> models = load_models(cli, out);
    DeltaPowerCurveOptions opts = curve_options(cfg, ship);

    PerformanceReport rep = build_report(models, fouling, events, dcf, ship, opts);
    save_report_csv(out + "/report.csv", rep);
    save_report_json(out + "/report.json", rep);
    for (const std::string& w : rep.warnings) std::cerr << "warning: " << w << "\n";

    // Pre/post curves per event and model, plus an SVG per event.
    auto step = static_cast<UtcSeconds>(opts.step_seconds);
    for (std::size_t ei = 0; ei < events.size(); ++ei) {
        const CleaningEvent& e = events[ei];
        std::vector<CurvePrediction> curves;
        std::vector<std::string> labels;
        for (const CalibratedModel& m : models) {
            CurveCondition pre{e.timestamp - step, opts.mean_draft, 0.0,
                               fouling.total_at(e.timestamp - step)};
            CurveCondition post{e.timestamp + step, opts.mean_draft, 0.0,
                                fouling.total_at(e.timestamp + step)};
            CurvePrediction cp = predict_calm_water_curve(
                m, pre, opts.rpm_min, opts.rpm_max, opts.n_points, SpeedVariable::Gps);
            CurvePrediction ca = predict_calm_water_curve(
                m, post, opts.rpm_min, opts.rpm_max, opts.n_points, SpeedVariable::Gps);
            std::string base = out + "/curve_event" + std::to_string(ei + 1) + "_" +
                               to_string(m.kind);
            save_curve_csv(base + "_pre.csv", cp);
            save_curve_csv(base + "_post.csv", ca);
            labels.push_back(to_string(m.kind) + " pre");
            labels.push_back(to_string(m.kind) + " post");
            curves.push_back(std::move(cp));
            curves.push_back(std::move(ca));
        }
        write_curve_svg(out + "/curve_event" + std::to_string(ei + 1) + ".svg", curves,
                        labels,
                        "Calm-water curves around " + format_iso8601(e.timestamp) +
                            " (" + to_string(e.kind) + ")");
    }
    std::cout << "report: " << rep.rows.size() << " rows -> " << out << "\n";
    return 0;
}

int cmd_curve(const Cli& cli) {
    RunConfig cfg = load_run_config(cli.config_path);
    std::string out = out_dir_for(cli, cfg);
    ShipConfig ship = load_ship_config(cfg.path("ship"));
    FoulingSeries fouling = load_fouling_csv(out + "/fouling.csv");
    std::vector<CalibratedModel> models = load_models(cli, out);
    DeltaPowerCurveOptions opts = curve_options(cfg, ship);

    UtcSeconds when = cfg.has("curve_timestamp")
                          ? parse_iso8601(cfg.str("curve_timestamp"))
                          : fouling.timestamps.back();
    std::string sv_name = cfg.str("curve_speed_variable", "gps");
    SpeedVariable sv = sv_name == "log" ? SpeedVariable::Log : SpeedVariable::Gps;

    std::vector<CurvePrediction> curves;
    std::vector<std::string> labels;
    for (const CalibratedModel& m : models) {
        CurveCondition cond{when, opts.mean_draft, 0.0, fouling.total_at(when)};
        CurvePrediction c = predict_calm_water_curve(m, cond, opts.rpm_min,
                                                     opts.rpm_max, opts.n_points, sv);
        save_curve_csv(out + "/curve_" + to_string(m.kind) + ".csv", c);
        if (c.monotonicity_warning)
            std::cerr << "warning: " << to_string(m.kind)
                      << " curve speed output non-monotone\n";
        labels.push_back(to_string(m.kind));
        curves.push_back(std::move(c));
    }
    write_curve_svg(out + "/curve.svg", curves, labels,
                    "Calm-water speed-power curve at " + format_iso8601(when));
    std::cout << "curve: " << curves.size() << " models -> " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ship performance model calibration and fouling analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    Cli cli;
    app.add_option("--config", cli.config_path, "Config or scenario file")->required();
    app.add_option("--out", cli.out_dir, "Output directory (overrides config)");
    app.add_option("--seed", cli.seed, "Seed override");
    app.add_option("--models", cli.models, "Comma list from {pcr,plsr,ann}");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic fleet dataset");
    auto* preprocess = app.add_subcommand("preprocess", "Filter, validate and build features");
    auto* calibrate = app.add_subcommand("calibrate", "Fit the regression models");
    auto* trend = app.add_subcommand("trend", "Constant-condition trend series");
    auto* report = app.add_subcommand("report", "Per-event power-demand report");
    auto* curve = app.add_subcommand("curve", "Calm-water speed-power curve");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(cli);
        if (preprocess->parsed()) return cmd_preprocess(cli);
        if (calibrate->parsed()) return cmd_calibrate(cli);
        if (trend->parsed()) return cmd_trend(cli);
        if (report->parsed()) return cmd_report(cli);
        if (curve->parsed()) return cmd_curve(cli);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
