#include "shipperf/preprocess.hpp"

#include <cmath>
#include <deque>

namespace shipperf {

void Standardizer::fit(const Matrix& data, const std::vector<int>& train_rows) {
    if (train_rows.empty()) throw DataError("standardizer: empty training rows");
    const auto n = data.cols();
    means = Vector::Zero(n);
    stds = Vector::Zero(n);
    for (int r : train_rows) means += data.row(r).transpose();
    means /= static_cast<double>(train_rows.size());
    for (int r : train_rows)
        stds += (data.row(r).transpose() - means).array().square().matrix();
    stds = (stds / static_cast<double>(train_rows.size())).array().sqrt();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (stds[j] < 1e-12) {
            std::string name = (j < static_cast<Eigen::Index>(column_names.size()))
                                   ? column_names[static_cast<std::size_t>(j)]
                                   : ("column " + std::to_string(j));
            throw DataError("zero-variance column on training rows: " + name);
        }
    }
}

Matrix Standardizer::apply(const Matrix& data) const {
    return (data.rowwise() - means.transpose()).array().rowwise() /
           stds.transpose().array();
}

Matrix Standardizer::invert(const Matrix& standardized) const {
    return (standardized.array().rowwise() * stds.transpose().array()).matrix()
               .rowwise() + means.transpose();
}

Vector Standardizer::invert_row(const Vector& s) const {
    return (s.array() * stds.array() + means.array()).matrix();
}

FeatureMatrix build_features(const std::vector<VoyageSample>& samples,
                             const std::vector<double>& fgf_total,
                             bool include_nonlinear, bool raw_wave_dir) {
    if (samples.size() != fgf_total.size())
        throw DataError("fgf series not aligned with samples");
    const int m = static_cast<int>(samples.size());

    FeatureMatrix fm;
    fm.x_names = {"shaft_rpm", "mean_draft", "trim_by_aft", "long_wind_speed",
                  "trans_wind_speed", "long_current_speed", "sig_wave_height",
                  raw_wave_dir ? "rel_mean_wave_dir" : "cos_rel_mean_wave_dir",
                  "mean_wave_period", "fgf_total"};
    fm.y_names = {"shaft_power", "gps_speed", "log_speed"};
    fm.x_nonlinear.assign(10, false);
    fm.y_nonlinear.assign(3, false);
    if (include_nonlinear) {
        fm.x_names.insert(fm.x_names.end(),
                          {"shaft_rpm_cubed", "mean_draft_sqrt", "sig_wave_height_sq"});
        fm.x_nonlinear.insert(fm.x_nonlinear.end(), 3, true);
        fm.y_names.insert(fm.y_names.end(), {"gps_speed_cubed", "log_speed_cubed"});
        fm.y_nonlinear.insert(fm.y_nonlinear.end(), 2, true);
    }
    const int n = static_cast<int>(fm.x_names.size());
    const int k = static_cast<int>(fm.y_names.size());
    fm.X.resize(m, n);
    fm.Y.resize(m, k);
    fm.row_timestamps.reserve(samples.size());

    constexpr double kDeg = M_PI / 180.0;
    for (int i = 0; i < m; ++i) {
        const VoyageSample& s = samples[static_cast<std::size_t>(i)];
        double md = s.mean_draft();
        if (md < 0) throw DataError("negative mean draft at row " + std::to_string(i));
        double wd = raw_wave_dir ? s.rel_mean_wave_dir
                                 : std::cos(s.rel_mean_wave_dir * kDeg);
        fm.X(i, 0) = s.shaft_rpm;
        fm.X(i, 1) = md;
        fm.X(i, 2) = s.trim_by_aft();
        fm.X(i, 3) = s.long_wind_speed;
        fm.X(i, 4) = s.trans_wind_speed;
        fm.X(i, 5) = s.long_current_speed;
        fm.X(i, 6) = s.sig_wave_height;
        fm.X(i, 7) = wd;
        fm.X(i, 8) = s.mean_wave_period;
        fm.X(i, 9) = fgf_total[static_cast<std::size_t>(i)];
        fm.Y(i, 0) = s.shaft_power;
        fm.Y(i, 1) = s.gps_speed;
        fm.Y(i, 2) = s.log_speed;
        if (include_nonlinear) {
            fm.X(i, 10) = std::pow(s.shaft_rpm, 3);
            fm.X(i, 11) = std::sqrt(md);
            fm.X(i, 12) = s.sig_wave_height * s.sig_wave_height;
            fm.Y(i, 3) = std::pow(s.gps_speed, 3);
            fm.Y(i, 4) = std::pow(s.log_speed, 3);
        }
        fm.row_timestamps.push_back(s.timestamp);
    }
    return fm;
}

void fit_standardizer(FeatureMatrix& fm, const std::vector<int>& train_rows) {
    fm.x_std.column_names = fm.x_names;
    fm.y_std.column_names = fm.y_names;
    fm.x_std.fit(fm.X, train_rows);
    fm.y_std.fit(fm.Y, train_rows);
}

void apply_standardizer(FeatureMatrix& fm) {
    if (fm.standardized) throw DataError("feature matrix already standardized");
    if (fm.x_std.means.size() == 0) throw DataError("standardizer not fitted");
    fm.X = fm.x_std.apply(fm.X);
    fm.Y = fm.y_std.apply(fm.Y);
    fm.standardized = true;
}

std::vector<int> expand_ranges(const std::vector<IndexRange>& ranges) {
    std::vector<int> rows;
    for (const auto& r : ranges)
        for (int i = r.begin; i < r.end; ++i) rows.push_back(i);
    return rows;
}

std::vector<int> SplitPlan::train_rows() const { return expand_ranges(train); }
std::vector<int> SplitPlan::validation_rows() const { return expand_ranges(validation); }
std::vector<int> SplitPlan::test_rows() const { return expand_ranges(test); }

namespace {

// Removes [b, e) from a sorted list of disjoint ranges.
std::vector<IndexRange> subtract(const std::vector<IndexRange>& ranges, IndexRange cut) {
    std::vector<IndexRange> out;
    for (const auto& r : ranges) {
        if (cut.end <= r.begin || cut.begin >= r.end) {
            out.push_back(r);
            continue;
        }
        if (cut.begin > r.begin) out.push_back({r.begin, cut.begin});
        if (cut.end < r.end) out.push_back({cut.end, r.end});
    }
    return out;
}

}  // namespace

SplitPlan chronological_split(int m, const std::vector<CleaningEvent>& events,
                              const std::vector<UtcSeconds>& timestamps,
                              const SplitOptions& opts) {
    if (m <= 50) throw DataError("chronological split needs more than 50 samples");
    SplitPlan plan;
    std::vector<IndexRange> train{{0, m}};

    if (opts.layout == SplitLayout::Custom) {
        if (std::abs(opts.custom_train + opts.custom_test - 1.0) > 1e-9)
            throw ConfigError("custom split fractions must sum to 1");
        int n_test = static_cast<int>(std::lround(opts.custom_test * m));
        if (n_test > 0) {
            plan.test.push_back({m - n_test, m});
            train = subtract(train, plan.test.back());
        }
    } else {
        int n_test = static_cast<int>(std::lround(opts.test_fraction * m));
        if (opts.layout == SplitLayout::OriginalShip) {
            // First third of the test budget from the start, the rest from the end.
            int head = static_cast<int>(std::lround(n_test / 3.0));
            int tail = n_test - head;
            plan.test.push_back({0, head});
            plan.test.push_back({m - tail, m});
        } else {
            int head = static_cast<int>(std::lround(n_test / 4.0));
            int tail = head;
            int mid = n_test - head - tail;
            int mid_begin = (m - mid) / 2;
            plan.test.push_back({0, head});
            plan.test.push_back({mid_begin, mid_begin + mid});
            plan.test.push_back({m - tail, m});
        }
        for (const auto& r : plan.test) train = subtract(train, r);
    }

    if (opts.with_validation) {
        int n_train = 0;
        for (const auto& r : train) n_train += r.size();
        int n_val = static_cast<int>(std::lround(0.1 * n_train));
        // Carve the slice from the middle of the longest training stretch.
        const IndexRange* longest = nullptr;
        for (const auto& r : train)
            if (!longest || r.size() > longest->size()) longest = &r;
        if (longest && n_val > 0 && n_val < longest->size()) {
            int begin = longest->begin + (longest->size() - n_val) / 2;
            plan.validation.push_back({begin, begin + n_val});
            train = subtract(train, plan.validation.back());
        }
    }
    plan.train = train;

    if (opts.min_train_samples_per_event_side > 0 &&
        static_cast<int>(timestamps.size()) == m) {
        auto train_rows = plan.train_rows();
        for (const auto& e : events) {
            int before = 0, after = 0;
            for (int r : train_rows)
                (timestamps[static_cast<std::size_t>(r)] < e.timestamp ? before : after)++;
            if (before < opts.min_train_samples_per_event_side ||
                after < opts.min_train_samples_per_event_side)
                plan.warnings.push_back("event at " + format_iso8601(e.timestamp) +
                                        " has too few training samples on one side");
        }
    }
    return plan;
}

std::vector<bool> quasi_steady_filter(const std::vector<VoyageSample>& samples,
                                      int window_len, double rpm_band,
                                      double speed_band) {
    const int m = static_cast<int>(samples.size());
    if (window_len < 3 || window_len % 2 == 0)
        throw ConfigError("quasi-steady window must be odd and >= 3");
    if (rpm_band <= 0 || speed_band <= 0)
        throw ConfigError("quasi-steady bands must be positive");
    if (window_len > m) throw DataError("quasi-steady window longer than series");

    const int half = window_len / 2;
    std::vector<bool> mask(static_cast<std::size_t>(m), false);

    // Monotone-deque sliding max/min over the centered window.
    auto series_ok = [&](auto getter, double band, std::vector<bool>& out) {
        std::deque<int> maxq, minq;
        for (int i = 0; i < m; ++i) {
            double v = getter(samples[static_cast<std::size_t>(i)]);
            while (!maxq.empty() && getter(samples[static_cast<std::size_t>(maxq.back())]) <= v)
                maxq.pop_back();
            maxq.push_back(i);
            while (!minq.empty() && getter(samples[static_cast<std::size_t>(minq.back())]) >= v)
                minq.pop_back();
            minq.push_back(i);
            int center = i - half;
            if (center < half) continue;
            int lo = center - half;
            while (maxq.front() < lo) maxq.pop_front();
            while (minq.front() < lo) minq.pop_front();
            double range = getter(samples[static_cast<std::size_t>(maxq.front())]) -
                           getter(samples[static_cast<std::size_t>(minq.front())]);
            if (range <= band) out[static_cast<std::size_t>(center)] = true;
        }
    };

    std::vector<bool> rpm_ok(static_cast<std::size_t>(m), false);
    std::vector<bool> spd_ok(static_cast<std::size_t>(m), false);
    series_ok([](const VoyageSample& s) { return s.shaft_rpm; }, rpm_band, rpm_ok);
    series_ok([](const VoyageSample& s) { return s.gps_speed; }, speed_band, spd_ok);
    for (int i = 0; i < m; ++i)
        mask[static_cast<std::size_t>(i)] =
            rpm_ok[static_cast<std::size_t>(i)] && spd_ok[static_cast<std::size_t>(i)];
    return mask;
}

HindcastValidation validate_hindcast(const std::vector<VoyageSample>& samples) {
    std::vector<double> diff, cur;
    for (const auto& s : samples) {
        diff.push_back(s.gps_speed - s.log_speed);
        // Hindcast current in knots, aiding-positive (opposing-positive sign
        // convention flipped to match gps - log).
        cur.push_back(-s.long_current_speed / kKnotsToMps);
    }
    HindcastValidation rep;
    rep.pairs = diff.size();
    if (rep.pairs < 10) throw DataError("validate_hindcast: fewer than 10 valid pairs");
    const double n = static_cast<double>(rep.pairs);
    double md = 0, mc = 0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        md += diff[i];
        mc += cur[i];
    }
    md /= n;
    mc /= n;
    double se = 0, vd = 0, vc = 0, cov = 0, bias = 0;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        double e = diff[i] - cur[i];
        bias += e;
        se += e * e;
        vd += (diff[i] - md) * (diff[i] - md);
        vc += (cur[i] - mc) * (cur[i] - mc);
        cov += (diff[i] - md) * (cur[i] - mc);
    }
    rep.current_bias = bias / n;
    rep.current_rmse = std::sqrt(se / n);
    if (vd <= 0 || vc <= 0) {
        rep.current_correlation = std::nan("");
        rep.current_correlation_defined = false;
    } else {
        rep.current_correlation = cov / std::sqrt(vd * vc);
    }
    return rep;
}

}  // namespace shipperf
