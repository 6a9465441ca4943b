#pragma once

#include <string>
#include <vector>

#include "nacest/dependence.hpp"
#include "nacest/parsimony.hpp"
#include "nacest/tree.hpp"
#include "nacest/triples.hpp"

namespace nacest {

// UPGMA-style agglomeration. Equal distances (within 1e-12) merge the pair
// whose smallest member labels come first lexicographically.
RootedTree average_linkage(const Eigen::MatrixXd& dist, const std::vector<std::string>& labels);
RootedTree average_linkage(const DependenceMatrix& m);

// Lazily computed empirical Kendall distributions of column pairs.
class KendallCache {
 public:
  explicit KendallCache(const PseudoObservations& u);
  const KendallDistribution& get(int a, int b);
  const PseudoObservations& data() const { return u_; }

 private:
  const PseudoObservations& u_;
  std::vector<KendallDistribution> cache_;
  std::vector<bool> ready_;
};

// Position (0, 1, 2) of the outlier among column indices (a, b, c): the
// variable shared by the two closest pairwise Kendall distributions. Ties go
// to the earlier position.
int closest_pair_outlier(KendallCache& cache, int a, int b, int c);

TripleShape trivariate_binary_estimate(const PseudoObservations& u, const std::string& i,
                                       const std::string& j, const std::string& k);

// All triples over the sorted column labels, each resolved as a cherry.
TripleSet estimate_triples(const PseudoObservations& u);

enum class BinaryMethod { KT, HD, KIND, NJNNI, RNIX };

std::string to_string(BinaryMethod method);
// kt, hD, kind, NJNNI, RNix (case-insensitive).
BinaryMethod parse_binary_method(const std::string& name);

RootedTree supertree_njnni(const PseudoObservations& u, const SearchConfig& config);
RootedTree supertree_rnix(const PseudoObservations& u, const SearchConfig& config);

RootedTree build_binary(const PseudoObservations& u, BinaryMethod method,
                        const SearchConfig& config = {});

}  // namespace nacest
