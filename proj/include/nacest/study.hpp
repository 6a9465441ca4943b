#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nacest/collapse.hpp"
#include "nacest/nac.hpp"
#include "nacest/parsimony.hpp"

namespace nacest {

struct StudyConfig {
  std::string name;
  NacSpec nac;
  std::vector<int> sample_sizes{30, 100, 500};
  int replicates = 100;
  std::vector<std::string> estimators;
  // Per estimator name; estimators without an entry use default_grid().
  std::map<std::string, std::vector<double>> thresholds;
  int bootstrap_B = 200;
  SearchConfig search;
  std::uint64_t seed = 1;
  // Off by default so reruns write identical files.
  bool record_timing = false;

  void validate() const;
  std::vector<double> grid(const EstimatorSpec& estimator) const;

  // Unknown keys are rejected. "paper_config" loads a shipped configuration
  // that the remaining keys then override. Throws DataError.
  static StudyConfig from_json(const nlohmann::json& value);
  nlohmann::json to_json() const;
};

// tau_c grid for kagg, alpha grid for kb and the baseline.
std::vector<double> default_grid(CollapseRule rule);

struct StudyRecord {
  std::string estimator;
  int n = 0;
  double threshold = 0.0;
  int replicate = 0;
  double dist01 = 0.0;
  double dist_tri = 0.0;
  double millis = 0.0;
  bool error = false;
};

struct StudyCell {
  std::string estimator;
  int n = 0;
  double threshold = 0.0;
  std::vector<double> dist01;
  std::vector<double> dist_tri;
  double mean01 = 0.0;
  double mean_tri = 0.0;
  double summary01 = 0.0;
  double summary_tri = 0.0;
  double mean_millis = 0.0;
  int errors = 0;
};

struct StudyResult {
  std::string name;
  int d = 0;
  std::uint64_t seed = 0;
  std::vector<StudyRecord> records;

  // One cell per (estimator, n, threshold) in record order.
  std::vector<StudyCell> cells() const;
};

// (mean)^2 + population variance.
double summary_measure(const std::vector<double>& values);

StudyResult run_study(const StudyConfig& config);

// Grid value with the smallest mean 01-distance; ties go to the smaller value.
double optimal_threshold(const StudyResult& result, const std::string& estimator, int n);

// Each triple: its estimated cherry when the fan test rejects (p <= alpha),
// else a fan; then reconstruct.
RootedTree su_baseline_estimate(const PseudoObservations& u, double alpha, int B, std::uint64_t seed);

// Shipped target structures and parameter sets: fig7_left ... fig12.
std::map<std::string, StudyConfig> paper_configs();
std::vector<std::string> default_estimators();

void write_results_csv(std::ostream& out, const StudyResult& result);
std::vector<StudyRecord> read_results_csv(std::istream& in);
nlohmann::json summary_json(const StudyResult& result);

}  // namespace nacest
