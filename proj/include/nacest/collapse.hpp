#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "nacest/builders.hpp"
#include "nacest/dependence.hpp"
#include "nacest/tree.hpp"

namespace nacest {

enum class CollapseRule { KAGG, KB };

struct CollapseConfig {
  CollapseRule rule = CollapseRule::KAGG;
  double tau_c = 0.075;
  double alpha = 0.05;
  int bootstrap_B = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

struct NodeSummary {
  int node = -1;
  double mean_tau = 0.0;
};

// Mean Kendall tau over leaf pairs whose LCA is `node`.
NodeSummary node_tau_summary(const RootedTree& tree, int node, const PseudoObservations& u);

// Same from a precomputed tau matrix whose rows follow `labels`.
double mean_tau(const RootedTree& tree, int node, const Eigen::MatrixXd& tau,
                const std::vector<std::string>& labels);

// Every internal node annotated with its mean tau.
RootedTree annotate_mean_tau(const RootedTree& tree, const PseudoObservations& u);

RootedTree collapse_kagg(const RootedTree& tree, const PseudoObservations& u, double tau_c);
RootedTree collapse_kagg(const RootedTree& tree, const Eigen::MatrixXd& tau,
                         const std::vector<std::string>& labels, double tau_c);

// Bootstrap test of the 3-fan hypothesis on columns (i, j, k). The statistic
// is the distance between the mean of the two closest empirical Kendall
// distributions and the third; bootstrap replicates use the resampled
// distributions minus the full-sample ones. p = (1 + #{T* >= T}) / (B + 1).
double su_triple_test(const PseudoObservations& u, const std::string& i, const std::string& j,
                      const std::string& k, int B, std::uint64_t seed);

// Caches p-values of triples. Each triple draws from its own stream derived
// from the master seed and its sorted labels, so a p-value does not depend
// on which other triples were tested.
class TripleTester {
 public:
  TripleTester(const PseudoObservations& u, int B, std::uint64_t seed);

  double p_value(int a, int b, int c);
  const PseudoObservations& data() const { return u_; }
  int column(const std::string& label) const { return u_.column(label); }
  std::size_t tests_run() const { return cache_.size(); }

 private:
  const PseudoObservations& u_;
  int B_;
  std::uint64_t seed_;
  std::vector<std::vector<int>> ranks_;
  std::map<std::tuple<int, int, int>, double> cache_;
};

double triple_test_p_value(const std::vector<int>& ra, const std::vector<int>& rb,
                           const std::vector<int>& rc, int B, std::uint64_t seed);

RootedTree collapse_kb(const RootedTree& tree, const PseudoObservations& u, double alpha, int B,
                       std::uint64_t seed);
RootedTree collapse_kb(const RootedTree& tree, TripleTester& tester, double alpha);

RootedTree collapse(const RootedTree& tree, const PseudoObservations& u, const CollapseConfig& config);

// "<method>_<rule>", e.g. kt_kagg, NJNNI_kb, or SU_baseline.
struct EstimatorSpec {
  std::string name;
  bool baseline = false;
  BinaryMethod method = BinaryMethod::KT;
  CollapseRule rule = CollapseRule::KAGG;
};
EstimatorSpec parse_estimator(const std::string& name);
std::string to_string(CollapseRule rule);

RootedTree estimate_structure(const Dataset& data, BinaryMethod method, const CollapseConfig& config,
                              const SearchConfig& search = {});

}  // namespace nacest
