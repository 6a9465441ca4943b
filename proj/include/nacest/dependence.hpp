#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nacest {

// n x d observations with one named column per variable.
struct Dataset {
  Eigen::MatrixXd values;
  std::vector<std::string> column_names;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index d() const { return values.cols(); }
  // Throws std::invalid_argument if n < 3, a cell is not finite, or names are
  // missing or repeated.
  void validate() const;
  int column(const std::string& name) const;
};

// Rank-transformed data in (0, 1), same column names as the source.
struct PseudoObservations {
  Eigen::MatrixXd u;
  std::vector<std::string> labels;

  Eigen::Index n() const { return u.rows(); }
  Eigen::Index d() const { return u.cols(); }
  int column(const std::string& label) const;
  std::span<const double> col(Eigen::Index j) const {
    return {u.col(j).data(), static_cast<std::size_t>(u.rows())};
  }
};

enum class DependenceKind { KT, HD, KIND };

// Symmetric, zero-diagonal matrix of distances that shrink as dependence
// grows.
struct DependenceMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;
  DependenceKind kind = DependenceKind::KT;
};

// Sorted pseudo-Kendall scores W_i in [0, 1].
struct KendallDistribution {
  std::vector<double> w;
  std::size_t n() const { return w.size(); }
};

// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(std::span<const double> x);

// Dense integer ranks 0..m-1; equal values share a rank.
std::vector<int> dense_ranks(std::span<const double> x);

PseudoObservations pseudo_observations(const Dataset& data);

// (concordant - discordant) / C(n, 2); tied pairs count as neither. O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

template <typename DerivedX, typename DerivedY>
double kendall_tau(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  const Eigen::VectorXd xv = x;
  const Eigen::VectorXd yv = y;
  return kendall_tau(std::span<const double>(xv.data(), xv.size()),
                     std::span<const double>(yv.data(), yv.size()));
}

// d x d matrix of pairwise Kendall's tau between columns (unit diagonal).
Eigen::MatrixXd kendall_matrix(const Eigen::MatrixXd& columns);

// For each i, #{j : x_j < x_i and y_j < y_i}, from integer ranks.
std::vector<int> dominance_counts(std::span<const int> rx, std::span<const int> ry);

KendallDistribution empirical_kendall_distribution(std::span<const double> x,
                                                   std::span<const double> y);

// Integral over [0, 1] of the squared difference of the two empirical CDFs,
// computed exactly from the step functions.
double kendall_dist_distance(const KendallDistribution& a, const KendallDistribution& b);

// Kendall distribution of two independent variables: t - t log t.
double independence_kendall_cdf(double t);

// Integral over [0, 1] of (K_n(t) - (t - t log t))^2, exact.
double independence_deviation(const KendallDistribution& k);
double independence_deviation(std::span<const double> x, std::span<const double> y);

// Hoeffding's D with the usual factor 30 (1 for a comonotone sample). n >= 5.
double hoeffding_d(std::span<const double> x, std::span<const double> y);

DependenceMatrix dependence_matrix(const PseudoObservations& u, DependenceKind kind);
DependenceMatrix dependence_matrix(const Dataset& data, DependenceKind kind);

std::string to_string(DependenceKind kind);
// Accepts kt, hd/hD, kind (case-insensitive).
DependenceKind parse_dependence_kind(const std::string& name);

}  // namespace nacest
