#include "shipperf/serialize.hpp"

#include <fstream>
#include <sstream>

#include "shipperf/csv.hpp"

namespace shipperf {

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (j.empty()) return Matrix(0, 0);
    Matrix m(j.size(), j.front().size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const nlohmann::json& j) {
    Vector v(j.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

nlohmann::json standardizer_to_json(const Standardizer& s) {
    return {{"means", vector_to_json(s.means)},
            {"stds", vector_to_json(s.stds)},
            {"columns", s.column_names}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
    Standardizer s;
    s.means = vector_from_json(j.at("means"));
    s.stds = vector_from_json(j.at("stds"));
    s.column_names = j.at("columns").get<std::vector<std::string>>();
    return s;
}

namespace {

nlohmann::json provenance_json(const Provenance& p) {
    return {{"config_hash", p.config_hash}, {"seed", p.seed}};
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(1) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

}  // namespace

void save_model_json(const std::string& path, const CalibratedModel& model,
                     const Provenance& prov) {
    nlohmann::json j;
    j["version"] = 1;
    j["provenance"] = provenance_json(prov);
    j["kind"] = to_string(model.kind);
    j["nonlinear_features"] = model.nonlinear_features;
    switch (model.kind) {
        case ModelKind::Pcr: {
            const PcrModel& m = model.pcr;
            j["model"] = {{"A", m.A},
                          {"loadings", matrix_to_json(m.loadings)},
                          {"coeffs", matrix_to_json(m.coeffs)},
                          {"ridge_alpha", vector_to_json(m.ridge_alpha)},
                          {"x_std", standardizer_to_json(m.x_std)},
                          {"y_std", standardizer_to_json(m.y_std)},
                          {"warnings", m.warnings}};
            break;
        }
        case ModelKind::Plsr: {
            const PlsrModel& m = model.plsr;
            j["model"] = {{"A", m.A},
                          {"weights", matrix_to_json(m.weights)},
                          {"x_loadings", matrix_to_json(m.x_loadings)},
                          {"y_loadings", matrix_to_json(m.y_loadings)},
                          {"inner_coeffs", vector_to_json(m.inner_coeffs)},
                          {"regression", matrix_to_json(m.regression)},
                          {"x_std", standardizer_to_json(m.x_std)},
                          {"y_std", standardizer_to_json(m.y_std)}};
            break;
        }
        case ModelKind::Ann: {
            const MlpModel& m = model.ann;
            nlohmann::json weights = nlohmann::json::array();
            nlohmann::json biases = nlohmann::json::array();
            for (const Matrix& w : m.weights) weights.push_back(matrix_to_json(w));
            for (const Vector& b : m.biases) biases.push_back(vector_to_json(b));
            j["model"] = {{"layer_sizes", m.layer_sizes},
                          {"weights", std::move(weights)},
                          {"biases", std::move(biases)},
                          {"p_drop", m.p_drop},
                          {"tau", m.tau},
                          {"length_scale", m.length_scale},
                          {"lambda", m.lambda},
                          {"n_train", m.n_train},
                          {"seed", m.seed},
                          {"t_passes", m.t_passes},
                          {"x_std", standardizer_to_json(m.x_std)},
                          {"y_std", standardizer_to_json(m.y_std)}};
            break;
        }
    }
    write_json(path, j);
}

CalibratedModel load_model_json(const std::string& path) {
    nlohmann::json j = read_json(path);
    if (j.at("version").get<int>() != 1)
        throw ModelError("unsupported model file version in " + path);
    CalibratedModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.nonlinear_features = j.at("nonlinear_features").get<bool>();
    const nlohmann::json& m = j.at("model");
    switch (model.kind) {
        case ModelKind::Pcr:
            model.pcr.A = m.at("A").get<int>();
            model.pcr.loadings = matrix_from_json(m.at("loadings"));
            model.pcr.coeffs = matrix_from_json(m.at("coeffs"));
            model.pcr.ridge_alpha = vector_from_json(m.at("ridge_alpha"));
            model.pcr.x_std = standardizer_from_json(m.at("x_std"));
            model.pcr.y_std = standardizer_from_json(m.at("y_std"));
            model.pcr.warnings = m.at("warnings").get<std::vector<std::string>>();
            break;
        case ModelKind::Plsr:
            model.plsr.A = m.at("A").get<int>();
            model.plsr.weights = matrix_from_json(m.at("weights"));
            model.plsr.x_loadings = matrix_from_json(m.at("x_loadings"));
            model.plsr.y_loadings = matrix_from_json(m.at("y_loadings"));
            model.plsr.inner_coeffs = vector_from_json(m.at("inner_coeffs"));
            model.plsr.regression = matrix_from_json(m.at("regression"));
            model.plsr.x_std = standardizer_from_json(m.at("x_std"));
            model.plsr.y_std = standardizer_from_json(m.at("y_std"));
            break;
        case ModelKind::Ann:
            model.ann.layer_sizes = m.at("layer_sizes").get<std::vector<int>>();
            for (const auto& w : m.at("weights"))
                model.ann.weights.push_back(matrix_from_json(w));
            for (const auto& b : m.at("biases"))
                model.ann.biases.push_back(vector_from_json(b));
            model.ann.p_drop = m.at("p_drop").get<double>();
            model.ann.tau = m.at("tau").get<double>();
            model.ann.length_scale = m.at("length_scale").get<double>();
            model.ann.lambda = m.at("lambda").get<double>();
            model.ann.n_train = m.at("n_train").get<int>();
            model.ann.seed = m.at("seed").get<std::uint64_t>();
            model.ann.t_passes = m.at("t_passes").get<int>();
            model.ann.x_std = standardizer_from_json(m.at("x_std"));
            model.ann.y_std = standardizer_from_json(m.at("y_std"));
            break;
    }
    return model;
}

void save_cv_report_json(const std::string& path, const CvReport& r,
                         const Provenance& prov) {
    nlohmann::json j;
    j["version"] = 1;
    j["provenance"] = provenance_json(prov);
    j["press"] = matrix_to_json(r.press);
    j["ss"] = matrix_to_json(r.ss);
    j["ratios"] = matrix_to_json(r.ratios);
    j["selected_A"] = r.selected_A;
    j["no_significant_component"] = r.no_significant_component;
    j["evaluated_A"] = r.evaluated_A;
    write_json(path, j);
}

void save_cv_report_csv(const std::string& path, const CvReport& r) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "component,target,press,ss_prev,ratio\n";
    for (Eigen::Index a = 0; a < r.evaluated_A; ++a)
        for (Eigen::Index t = 0; t < r.press.cols(); ++t)
            out << (a + 1) << "," << t << "," << format_double(r.press(a, t)) << ","
                << format_double(r.ss(a, t)) << "," << format_double(r.ratios(a, t))
                << "\n";
}

namespace {

nlohmann::json ranges_to_json(const std::vector<IndexRange>& rs) {
    nlohmann::json a = nlohmann::json::array();
    for (const IndexRange& r : rs) a.push_back({{"begin", r.begin}, {"end", r.end}});
    return a;
}

std::vector<IndexRange> ranges_from_json(const nlohmann::json& j) {
    std::vector<IndexRange> rs;
    for (const auto& r : j)
        rs.push_back({r.at("begin").get<int>(), r.at("end").get<int>()});
    return rs;
}

}  // namespace

void save_split_json(const std::string& path, const SplitPlan& plan,
                     const Provenance& prov) {
    nlohmann::json j;
    j["version"] = 1;
    j["provenance"] = provenance_json(prov);
    j["train"] = ranges_to_json(plan.train);
    j["validation"] = ranges_to_json(plan.validation);
    j["test"] = ranges_to_json(plan.test);
    j["warnings"] = plan.warnings;
    write_json(path, j);
}

SplitPlan load_split_json(const std::string& path) {
    nlohmann::json j = read_json(path);
    SplitPlan plan;
    plan.train = ranges_from_json(j.at("train"));
    plan.validation = ranges_from_json(j.at("validation"));
    plan.test = ranges_from_json(j.at("test"));
    plan.warnings = j.at("warnings").get<std::vector<std::string>>();
    return plan;
}

void save_features(const std::string& csv_path, const std::string& meta_path,
                   const FeatureMatrix& fm, const Provenance& prov) {
    std::ofstream out(csv_path);
    if (!out) throw DataError("cannot write " + csv_path);
    out << "# config_hash=" << prov.config_hash << " seed=" << prov.seed << "\n";
    out << "timestamp";
    for (const std::string& n : fm.x_names) out << ",x_" << n;
    for (const std::string& n : fm.y_names) out << ",y_" << n;
    out << "\n";
    for (Eigen::Index i = 0; i < fm.X.rows(); ++i) {
        out << format_iso8601(fm.row_timestamps[static_cast<std::size_t>(i)]);
        for (Eigen::Index c = 0; c < fm.X.cols(); ++c)
            out << "," << format_double(fm.X(i, c));
        for (Eigen::Index c = 0; c < fm.Y.cols(); ++c)
            out << "," << format_double(fm.Y(i, c));
        out << "\n";
    }
    out.close();

    nlohmann::json j;
    j["version"] = 1;
    j["provenance"] = provenance_json(prov);
    j["x_names"] = fm.x_names;
    j["y_names"] = fm.y_names;
    j["x_nonlinear"] = fm.x_nonlinear;
    j["y_nonlinear"] = fm.y_nonlinear;
    j["standardized"] = fm.standardized;
    if (fm.x_std.means.size() > 0) {
        j["x_std"] = standardizer_to_json(fm.x_std);
        j["y_std"] = standardizer_to_json(fm.y_std);
    }
    write_json(meta_path, j);
}

FeatureMatrix load_features(const std::string& csv_path, const std::string& meta_path) {
    nlohmann::json j = read_json(meta_path);
    FeatureMatrix fm;
    fm.x_names = j.at("x_names").get<std::vector<std::string>>();
    fm.y_names = j.at("y_names").get<std::vector<std::string>>();
    fm.x_nonlinear = j.at("x_nonlinear").get<std::vector<bool>>();
    fm.y_nonlinear = j.at("y_nonlinear").get<std::vector<bool>>();
    fm.standardized = j.at("standardized").get<bool>();
    if (j.contains("x_std")) {
        fm.x_std = standardizer_from_json(j.at("x_std"));
        fm.y_std = standardizer_from_json(j.at("y_std"));
    }

    CsvTable t = read_csv(csv_path);
    const std::size_t n = fm.x_names.size(), k = fm.y_names.size();
    if (t.header.size() != 1 + n + k)
        throw SchemaError("feature csv does not match its meta file: " + csv_path);
    fm.X.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(n));
    fm.Y.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (row.size() != t.header.size())
            throw DataError("ragged feature csv row " + std::to_string(i));
        fm.row_timestamps.push_back(parse_iso8601(row[0]));
        for (std::size_t c = 0; c < n; ++c)
            fm.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                std::stod(row[1 + c]);
        for (std::size_t c = 0; c < k; ++c)
            fm.Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                std::stod(row[1 + n + c]);
    }
    return fm;
}

}  // namespace shipperf
