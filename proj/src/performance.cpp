#include "shipperf/performance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "shipperf/csv.hpp"

namespace shipperf {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Pcr: return "pcr";
        case ModelKind::Plsr: return "plsr";
        case ModelKind::Ann: return "ann";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "pcr") return ModelKind::Pcr;
    if (s == "plsr") return ModelKind::Plsr;
    if (s == "ann" || s == "mlp") return ModelKind::Ann;
    throw ConfigError("unknown model kind: " + s);
}

const Standardizer& CalibratedModel::x_std() const {
    switch (kind) {
        case ModelKind::Pcr: return pcr.x_std;
        case ModelKind::Plsr: return plsr.x_std;
        default: return ann.x_std;
    }
}

const Standardizer& CalibratedModel::y_std() const {
    switch (kind) {
        case ModelKind::Pcr: return pcr.y_std;
        case ModelKind::Plsr: return plsr.y_std;
        default: return ann.y_std;
    }
}

Matrix CalibratedModel::predict(const Matrix& X_raw) const {
    switch (kind) {
        case ModelKind::Pcr: return pcr.predict(X_raw);
        case ModelKind::Plsr: return plsr.predict(X_raw);
        default: return predict_standard(ann, X_raw);
    }
}

namespace {

std::vector<VoyageSample> fabricate_samples(double rpm, double mean_draft,
                                            const std::vector<UtcSeconds>& timeline) {
    std::vector<VoyageSample> rows(timeline.size());
    for (std::size_t i = 0; i < timeline.size(); ++i) {
        VoyageSample& s = rows[i];
        s.timestamp = timeline[i];
        s.shaft_rpm = rpm;
        s.draft_fore = mean_draft;
        s.draft_aft = mean_draft;
        // Everything else stays at its zero default (calm water, no current).
    }
    return rows;
}

}  // namespace

Matrix fabricate_trend_input(const CalibratedModel& model, const TrendScenario& sc) {
    if (!sc.fouling || sc.timeline.empty())
        throw ConfigError("trend scenario needs a fouling series and a timeline");
    if (sc.fouling->timestamps.empty() ||
        sc.timeline.front() < sc.fouling->timestamps.front() ||
        sc.timeline.back() > sc.fouling->timestamps.back())
        throw DataError("trend timeline outside fouling series coverage");

    std::vector<double> fgf(sc.timeline.size());
    for (std::size_t i = 0; i < sc.timeline.size(); ++i)
        fgf[i] = sc.fouling->total_at(sc.timeline[i]);
    FeatureMatrix fm = build_features(fabricate_samples(sc.rpm, sc.mean_draft, sc.timeline),
                                      fgf, model.nonlinear_features);
    if (fm.X.cols() != model.x_std().means.size())
        throw ModelError("fabricated rows do not match the model feature schema");
    return fm.X;
}

TrendSeries predict_trends(const CalibratedModel& model, const TrendScenario& sc) {
    Matrix X = fabricate_trend_input(model, sc);
    Matrix Y = model.predict(X);

    TrendSeries out;
    out.timeline = sc.timeline;
    const bool cubic = model.nonlinear_features && Y.cols() >= 5;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        out.shaft_power.push_back(Y(i, 0));
        if (cubic) {
            double g3 = Y(i, 3), l3 = Y(i, 4);
            if (g3 < 0 || l3 < 0) out.clamped_negative_cube = true;
            out.gps_speed.push_back(std::cbrt(std::max(0.0, g3)));
            out.log_speed.push_back(std::cbrt(std::max(0.0, l3)));
            out.gps_speed_cubed.push_back(g3);
            out.log_speed_cubed.push_back(l3);
        } else {
            out.gps_speed.push_back(Y(i, 1));
            out.log_speed.push_back(Y(i, 2));
        }
    }
    return out;
}

namespace {

struct SweepResult {
    std::vector<double> power, power_lo, power_hi, gps, log;
    bool clamped = false;
};

// One rpm sweep serving both speed pathways; the MC band is computed once.
SweepResult sweep_curve(const CalibratedModel& model, const CurveCondition& cond,
                        double rpm_min, double rpm_max, int n_points) {
    if (n_points < 2) throw ConfigError("curve needs at least 2 points");
    if (!(rpm_max > rpm_min)) throw ConfigError("empty rpm range");

    std::vector<VoyageSample> rows(static_cast<std::size_t>(n_points));
    std::vector<double> fgf(rows.size(), cond.fgf);
    for (int i = 0; i < n_points; ++i) {
        VoyageSample& s = rows[static_cast<std::size_t>(i)];
        s.timestamp = cond.timestamp;
        s.shaft_rpm = rpm_min + (rpm_max - rpm_min) * i / (n_points - 1);
        s.draft_fore = cond.mean_draft - 0.5 * cond.trim;
        s.draft_aft = cond.mean_draft + 0.5 * cond.trim;
    }
    FeatureMatrix fm = build_features(rows, fgf, model.nonlinear_features);
    if (fm.X.cols() != model.x_std().means.size())
        throw ModelError("curve rows do not match the model feature schema");

    SweepResult res;
    Matrix Y, var;
    if (model.kind == ModelKind::Ann) {
        Matrix X_std = model.ann.x_std.apply(fm.X);
        McPrediction mc = predict_mc(model.ann, X_std, model.ann.t_passes, model.ann.seed);
        Y = destandardize_mean(model.ann, mc.mean);
        var = destandardize_variance(model.ann, mc.variance);
    } else {
        Y = model.predict(fm.X);
    }
    const bool cubic = model.nonlinear_features && Y.cols() >= 5;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        double p = Y(i, 0);
        res.power.push_back(p);
        if (var.size() > 0) {
            double half = 1.96 * std::sqrt(std::max(0.0, var(i, 0)));
            res.power_lo.push_back(p - half);
            res.power_hi.push_back(p + half);
        } else {
            res.power_lo.push_back(p);
            res.power_hi.push_back(p);
        }
        if (cubic) {
            double g3 = Y(i, 3), l3 = Y(i, 4);
            if (g3 < 0 || l3 < 0) res.clamped = true;
            res.gps.push_back(std::cbrt(std::max(0.0, g3)));
            res.log.push_back(std::cbrt(std::max(0.0, l3)));
        } else {
            res.gps.push_back(Y(i, 1));
            res.log.push_back(Y(i, 2));
        }
    }
    return res;
}

CurvePrediction assemble_curve(const SweepResult& res, const CurveCondition& cond,
                               SpeedVariable sv) {
    const std::vector<double>& speed = (sv == SpeedVariable::Gps) ? res.gps : res.log;
    std::vector<std::size_t> order(speed.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return speed[a] < speed[b]; });

    CurvePrediction c;
    c.condition = cond;
    c.speed_variable = sv;
    c.clamped_negative_cube = res.clamped;
    bool monotone = true;
    for (std::size_t i = 1; i < speed.size(); ++i)
        if (!(speed[i] > speed[i - 1])) monotone = false;
    for (std::size_t idx : order) {
        if (!c.speed_kn.empty() && !(speed[idx] > c.speed_kn.back())) {
            monotone = false;
            continue;  // keep the axis strictly increasing
        }
        c.speed_kn.push_back(speed[idx]);
        c.power_kw.push_back(res.power[idx]);
        c.lower_kw.push_back(res.power_lo[idx]);
        c.upper_kw.push_back(res.power_hi[idx]);
    }
    c.monotonicity_warning = !monotone;
    return c;
}

}  // namespace

CurvePrediction predict_calm_water_curve(const CalibratedModel& model,
                                         const CurveCondition& condition,
                                         double rpm_min, double rpm_max, int n_points,
                                         SpeedVariable speed_variable,
                                         double /*mean_draft_hint*/) {
    SweepResult res = sweep_curve(model, condition, rpm_min, rpm_max, n_points);
    return assemble_curve(res, condition, speed_variable);
}

double curve_power_at_speed(const CurvePrediction& curve, double speed_kn,
                            bool* extrapolated) {
    const auto& s = curve.speed_kn;
    const auto& p = curve.power_kw;
    if (s.empty()) throw ModelError("empty curve");
    bool extra = false;
    double value;
    if (s.size() == 1) {
        extra = true;
        value = p.front();
    } else if (speed_kn <= s.front()) {
        extra = speed_kn < s.front();
        value = p[0] + (p[1] - p[0]) * (speed_kn - s[0]) / (s[1] - s[0]);
    } else if (speed_kn >= s.back()) {
        std::size_t n = s.size();
        extra = speed_kn > s.back();
        value = p[n - 2] +
                (p[n - 1] - p[n - 2]) * (speed_kn - s[n - 2]) / (s[n - 1] - s[n - 2]);
    } else {
        auto it = std::upper_bound(s.begin(), s.end(), speed_kn);
        std::size_t hi = static_cast<std::size_t>(it - s.begin());
        std::size_t lo = hi - 1;
        double w = (speed_kn - s[lo]) / (s[hi] - s[lo]);
        value = p[lo] + w * (p[hi] - p[lo]);
    }
    if (extrapolated) *extrapolated = extra;
    return value;
}

namespace {

void resolve_curve_opts(const ShipConfig& config, const DeltaPowerCurveOptions& in,
                        double& rpm_min, double& rpm_max, double& draft) {
    rpm_min = in.rpm_min > 0 ? in.rpm_min : 0.4 * config.ncr_rpm;
    rpm_max = in.rpm_max > 0 ? in.rpm_max : 1.1 * config.ncr_rpm;
    draft = in.mean_draft >= 0 ? in.mean_draft : config.ballast_draft;
}

EventDeltaPower delta_between(const CalibratedModel& model, const ShipConfig& config,
                              const DeltaPowerCurveOptions& opts,
                              UtcSeconds t_before, double fgf_before,
                              UtcSeconds t_after, double fgf_after) {
    double rpm_min, rpm_max, draft;
    resolve_curve_opts(config, opts, rpm_min, rpm_max, draft);
    CurveCondition pre{t_before, draft, 0.0, fgf_before};
    CurveCondition post{t_after, draft, 0.0, fgf_after};
    SweepResult sw_pre = sweep_curve(model, pre, rpm_min, rpm_max, opts.n_points);
    SweepResult sw_post = sweep_curve(model, post, rpm_min, rpm_max, opts.n_points);

    EventDeltaPower out;
    bool extra = false, e = false;
    double before = curve_power_at_speed(assemble_curve(sw_pre, pre, SpeedVariable::Gps),
                                         config.service_speed, &e);
    extra |= e;
    double after = curve_power_at_speed(assemble_curve(sw_post, post, SpeedVariable::Gps),
                                        config.service_speed, &e);
    extra |= e;
    out.dp_gps_kw = after - before;
    before = curve_power_at_speed(assemble_curve(sw_pre, pre, SpeedVariable::Log),
                                  config.service_speed, &e);
    extra |= e;
    after = curve_power_at_speed(assemble_curve(sw_post, post, SpeedVariable::Log),
                                 config.service_speed, &e);
    extra |= e;
    out.dp_log_kw = after - before;
    out.extrapolated = extra;
    return out;
}

}  // namespace

EventDeltaPower delta_power_at_event(const CalibratedModel& model,
                                     const FoulingSeries& fouling,
                                     const CleaningEvent& event,
                                     const ShipConfig& config,
                                     const DeltaPowerCurveOptions& opts) {
    auto step = static_cast<UtcSeconds>(opts.step_seconds);
    UtcSeconds t_before = event.timestamp - step;
    UtcSeconds t_after = event.timestamp + step;
    return delta_between(model, config, opts, t_before, fouling.total_at(t_before),
                         t_after, fouling.total_at(t_after));
}

PerformanceReport build_report(const std::vector<CalibratedModel>& models,
                               const FoulingSeries& fouling,
                               const std::vector<CleaningEvent>& events,
                               const std::vector<DeltaCfSample>& delta_cf_series,
                               const ShipConfig& config,
                               const DeltaPowerCurveOptions& opts) {
    PerformanceReport rep;
    for (const CalibratedModel& m : models) rep.model_names.push_back(to_string(m.kind));

    auto finish_row = [&](ReportRow& row) {
        double mean = 0;
        std::size_t n = 0;
        for (double v : row.dp_gps_kw) { mean += v; ++n; }
        for (double v : row.dp_log_kw) { mean += v; ++n; }
        if (row.dp_delta_cf_available) { mean += row.dp_delta_cf_kw; ++n; }
        row.improvement = n > 0 && mean / static_cast<double>(n) < 0;
    };

    for (const CleaningEvent& e : events) {
        ReportRow row;
        row.label = format_iso8601(e.timestamp) + " " + to_string(e.kind);
        row.timestamp = e.timestamp;
        row.kind = to_string(e.kind);
        for (const CalibratedModel& m : models) {
            EventDeltaPower dp = delta_power_at_event(m, fouling, e, config, opts);
            row.dp_gps_kw.push_back(dp.dp_gps_kw);
            row.dp_log_kw.push_back(dp.dp_log_kw);
            if (dp.extrapolated)
                rep.warnings.push_back(row.label + ": curve extrapolated to service speed (" +
                                       to_string(m.kind) + ")");
        }
        try {
            row.dp_delta_cf_kw = delta_power_from_delta_cf(delta_cf_series, e, config);
            row.dp_delta_cf_available = true;
        } catch (const std::exception& ex) {
            rep.warnings.push_back(row.label + ": delta-CF pathway unavailable: " + ex.what());
        }
        finish_row(row);
        rep.rows.push_back(std::move(row));
    }

    if (!fouling.timestamps.empty()) {
        ReportRow row;
        row.label = "start vs end";
        row.timestamp = fouling.timestamps.back();
        row.kind = "-";
        UtcSeconds t0 = fouling.timestamps.front();
        UtcSeconds t1 = fouling.timestamps.back();
        for (const CalibratedModel& m : models) {
            EventDeltaPower dp = delta_between(m, config, opts, t0, fouling.total_at(t0),
                                               t1, fouling.total_at(t1));
            row.dp_gps_kw.push_back(dp.dp_gps_kw);
            row.dp_log_kw.push_back(dp.dp_log_kw);
        }
        finish_row(row);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

void save_report_csv(const std::string& path, const PerformanceReport& rep) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "label,timestamp,kind";
    for (const std::string& m : rep.model_names)
        out << "," << m << "_dp_gps_kw," << m << "_dp_log_kw";
    out << ",delta_cf_dp_kw,flag\n";
    for (const ReportRow& r : rep.rows) {
        out << r.label << "," << format_iso8601(r.timestamp) << "," << r.kind;
        for (std::size_t i = 0; i < rep.model_names.size(); ++i)
            out << "," << format_double(r.dp_gps_kw[i]) << ","
                << format_double(r.dp_log_kw[i]);
        out << "," << (r.dp_delta_cf_available ? format_double(r.dp_delta_cf_kw) : "")
            << "," << (r.improvement ? "improvement" : "degradation") << "\n";
    }
}

void save_report_json(const std::string& path, const PerformanceReport& rep) {
    nlohmann::json j;
    j["models"] = rep.model_names;
    j["warnings"] = rep.warnings;
    j["rows"] = nlohmann::json::array();
    for (const ReportRow& r : rep.rows) {
        nlohmann::json row;
        row["label"] = r.label;
        row["timestamp"] = format_iso8601(r.timestamp);
        row["kind"] = r.kind;
        row["dp_gps_kw"] = r.dp_gps_kw;
        row["dp_log_kw"] = r.dp_log_kw;
        if (r.dp_delta_cf_available) row["delta_cf_dp_kw"] = r.dp_delta_cf_kw;
        row["improvement"] = r.improvement;
        j["rows"].push_back(std::move(row));
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(1) << '\n';
}

void save_curve_csv(const std::string& path, const CurvePrediction& c) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "speed_kn,power_kw,lower_kw,upper_kw\n";
    for (std::size_t i = 0; i < c.speed_kn.size(); ++i)
        out << format_double(c.speed_kn[i]) << "," << format_double(c.power_kw[i]) << ","
            << format_double(c.lower_kw[i]) << "," << format_double(c.upper_kw[i]) << "\n";
}

void save_trend_csv(const std::string& path, const TrendSeries& t) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    bool cubic = !t.gps_speed_cubed.empty();
    out << "timestamp,shaft_power_kw,gps_speed_kn,log_speed_kn";
    if (cubic) out << ",gps_speed_cubed,log_speed_cubed";
    out << "\n";
    for (std::size_t i = 0; i < t.timeline.size(); ++i) {
        out << format_iso8601(t.timeline[i]) << "," << format_double(t.shaft_power[i])
            << "," << format_double(t.gps_speed[i]) << ","
            << format_double(t.log_speed[i]);
        if (cubic)
            out << "," << format_double(t.gps_speed_cubed[i]) << ","
                << format_double(t.log_speed_cubed[i]);
        out << "\n";
    }
}

void write_curve_svg(const std::string& path,
                     const std::vector<CurvePrediction>& curves,
                     const std::vector<std::string>& labels,
                     const std::string& title) {
    const int W = 840, H = 560, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& c : curves) {
        for (double v : c.speed_kn) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : c.lower_kw) ymin = std::min(ymin, v);
        for (double v : c.upper_kw) ymax = std::max(ymax, v);
    }
    if (!(xmax > xmin)) { xmin -= 1; xmax += 1; }
    if (!(ymax > ymin)) { ymin -= 1; ymax += 1; }
    double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
        << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        double xv = xmin + (xmax - xmin) * i / 5.0;
        double yv = ymin + (ymax - ymin) * i / 5.0;
        out << "<line x1=\"" << px(xv) << "\" y1=\"" << py(ymin) << "\" x2=\"" << px(xv)
            << "\" y2=\"" << py(ymax) << "\" stroke=\"#ddd\"/>\n"
            << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(yv) << "\" x2=\"" << px(xmax)
            << "\" y2=\"" << py(yv) << "\" stroke=\"#ddd\"/>\n"
            << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(std::round(xv * 10) / 10) << "</text>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(std::round(yv)) << "</text>\n";
    }
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << "speed [kn]</text>\n"
        << "<text x=\"18\" y=\"" << H / 2 << "\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 "
        << H / 2 << ")\">shaft power [kW]</text>\n";

    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        const char* color = palette[ci % 6];
        bool has_band = false;
        for (std::size_t i = 0; i < c.speed_kn.size(); ++i)
            if (c.upper_kw[i] != c.lower_kw[i]) has_band = true;
        if (has_band && c.speed_kn.size() > 1) {
            out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" "
                << "stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < c.speed_kn.size(); ++i)
                out << px(c.speed_kn[i]) << "," << py(c.upper_kw[i]) << " ";
            for (std::size_t i = c.speed_kn.size(); i-- > 0;)
                out << px(c.speed_kn[i]) << "," << py(c.lower_kw[i]) << " ";
            out << "\"/>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < c.speed_kn.size(); ++i)
            out << px(c.speed_kn[i]) << "," << py(c.power_kw[i]) << " ";
        out << "\"/>\n";
        std::string label = ci < labels.size() ? labels[ci] : "curve " + std::to_string(ci);
        out << "<rect x=\"" << ml + 10 << "\" y=\"" << mt + 8 + 18 * ci
            << "\" width=\"14\" height=\"4\" fill=\"" << color << "\"/>\n"
            << "<text x=\"" << ml + 30 << "\" y=\"" << mt + 14 + 18 * ci
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << label << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace shipperf
