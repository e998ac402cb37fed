#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "shipperf/mvr.hpp"
#include "shipperf/performance.hpp"
#include "shipperf/preprocess.hpp"

namespace shipperf {

// Every artifact carries the run provenance so reruns are traceable and
// comparable byte-for-byte.
struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
};

// FNV-1a, 64-bit, hex string. Used for config hashes and manifest entries.
std::string fnv1a_hex(const std::string& data);
std::string hash_file(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

void save_model_json(const std::string& path, const CalibratedModel& model,
                     const Provenance& prov);
CalibratedModel load_model_json(const std::string& path);

void save_cv_report_json(const std::string& path, const CvReport& report,
                         const Provenance& prov);
void save_cv_report_csv(const std::string& path, const CvReport& report);

void save_split_json(const std::string& path, const SplitPlan& plan,
                     const Provenance& prov);
SplitPlan load_split_json(const std::string& path);

// Raw-units feature table (timestamp + inputs + targets) plus a sidecar
// meta file holding names, nonlinear markers and the fitted standardizers.
void save_features(const std::string& csv_path, const std::string& meta_path,
                   const FeatureMatrix& fm, const Provenance& prov);
FeatureMatrix load_features(const std::string& csv_path, const std::string& meta_path);

}  // namespace shipperf
