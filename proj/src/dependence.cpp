#include "nacest/dependence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <stdexcept>

namespace nacest {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) throw std::invalid_argument("sequences differ in length");
  if (x.size() < min_n)
    throw std::invalid_argument("need at least " + std::to_string(min_n) + " observations");
}

// Fenwick tree over counts.
class CountTree {
 public:
  explicit CountTree(std::size_t size) : tree_(size + 1, 0) {}
  void add(std::size_t pos) {
    for (std::size_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Number of inserted positions < pos.
  long below(std::size_t pos) const {
    long s = 0;
    for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<long> tree_;
};

std::int64_t pairs(std::int64_t t) { return t * (t - 1) / 2; }

// Counts inversions (strict) of v while merge-sorting it.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      buf[k++] = v[j++];
      swaps += static_cast<std::int64_t>(mid - i);
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return swaps;
}

template <typename T>
std::int64_t tied_pairs_sorted(const std::vector<T>& sorted) {
  std::int64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += pairs(static_cast<std::int64_t>(run));
      run = 1;
    }
  }
  return total;
}

// Antiderivatives of t - t log t and of its square; both vanish at 0.
double indep_cdf_integral(double t) {
  if (t <= 0.0) return 0.0;
  return 0.75 * t * t - 0.5 * t * t * std::log(t);
}

double indep_cdf_sq_integral(double t) {
  if (t <= 0.0) return 0.0;
  const double l = std::log(t);
  const double t3 = t * t * t;
  return t3 * (17.0 / 27.0 - 8.0 / 9.0 * l + l * l / 3.0);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

void Dataset::validate() const {
  if (values.rows() < 3) throw std::invalid_argument("dataset needs at least 3 rows");
  if (static_cast<Eigen::Index>(column_names.size()) != values.cols())
    throw std::invalid_argument("column name count does not match the data");
  if (!values.allFinite()) throw std::invalid_argument("dataset contains non-finite cells");
  std::set<std::string> seen;
  for (const auto& name : column_names) {
    if (name.empty()) throw std::invalid_argument("empty column name");
    if (!seen.insert(name).second) throw std::invalid_argument("duplicate column name '" + name + "'");
  }
}

int Dataset::column(const std::string& name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) throw std::invalid_argument("unknown column '" + name + "'");
  return static_cast<int>(it - column_names.begin());
}

int PseudoObservations::column(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::invalid_argument("unknown column '" + label + "'");
  return static_cast<int>(it - labels.begin());
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = mean_rank;
    i = j;
  }
  return ranks;
}

std::vector<int> dense_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<int> ranks(n);
  int r = -1;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || x[idx[k]] != x[idx[k - 1]]) ++r;
    ranks[idx[k]] = r;
  }
  return ranks;
}

PseudoObservations pseudo_observations(const Dataset& data) {
  data.validate();
  PseudoObservations out;
  out.labels = data.column_names;
  out.u.resize(data.n(), data.d());
  const double scale = 1.0 / static_cast<double>(data.n() + 1);
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    const auto ranks = average_ranks({data.values.col(j).data(), static_cast<std::size_t>(data.n())});
    for (Eigen::Index i = 0; i < data.n(); ++i) out.u(i, j) = ranks[i] * scale;
  }
  return out;
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 2);
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::int64_t x_ties = 0, joint_ties = 0;
  std::size_t run_x = 1, run_xy = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    const bool same_x = k < n && x[idx[k]] == x[idx[k - 1]];
    const bool same_xy = same_x && y[idx[k]] == y[idx[k - 1]];
    if (same_x) {
      ++run_x;
    } else {
      x_ties += pairs(static_cast<std::int64_t>(run_x));
      run_x = 1;
    }
    if (same_xy) {
      ++run_xy;
    } else {
      joint_ties += pairs(static_cast<std::int64_t>(run_xy));
      run_xy = 1;
    }
  }

  std::vector<double> ys(n), buf(n);
  for (std::size_t k = 0; k < n; ++k) ys[k] = y[idx[k]];
  const std::int64_t discordant = merge_count(ys, buf, 0, n);
  const std::int64_t y_ties = tied_pairs_sorted(ys);

  const std::int64_t total = pairs(static_cast<std::int64_t>(n));
  const std::int64_t untied = total - x_ties - y_ties + joint_ties;
  return static_cast<double>(untied - 2 * discordant) / static_cast<double>(total);
}

Eigen::MatrixXd kendall_matrix(const Eigen::MatrixXd& columns) {
  const Eigen::Index d = columns.cols();
  const auto n = static_cast<std::size_t>(columns.rows());
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j)
      tau(i, j) = tau(j, i) =
          kendall_tau({columns.col(i).data(), n}, {columns.col(j).data(), n});
  return tau;
}

std::vector<int> dominance_counts(std::span<const int> rx, std::span<const int> ry) {
  const std::size_t n = rx.size();
  if (ry.size() != n) throw std::invalid_argument("rank sequences differ in length");
  std::vector<int> out(n, 0);
  if (n == 0) return out;
  const int max_x = *std::max_element(rx.begin(), rx.end());
  const int max_y = *std::max_element(ry.begin(), ry.end());

  // Counting sort by x rank.
  std::vector<std::size_t> start(static_cast<std::size_t>(max_x) + 2, 0);
  for (int r : rx) ++start[static_cast<std::size_t>(r) + 1];
  for (std::size_t r = 1; r < start.size(); ++r) start[r] += start[r - 1];
  std::vector<std::size_t> order(n);
  auto fill = start;
  for (std::size_t i = 0; i < n; ++i) order[fill[static_cast<std::size_t>(rx[i])]++] = i;

  CountTree tree(static_cast<std::size_t>(max_y) + 1);
  for (int r = 0; r <= max_x; ++r) {
    const std::size_t lo = start[r], hi = start[static_cast<std::size_t>(r) + 1];
    for (std::size_t k = lo; k < hi; ++k)
      out[order[k]] = static_cast<int>(tree.below(static_cast<std::size_t>(ry[order[k]])));
    for (std::size_t k = lo; k < hi; ++k) tree.add(static_cast<std::size_t>(ry[order[k]]));
  }
  return out;
}

KendallDistribution empirical_kendall_distribution(std::span<const double> x,
                                                   std::span<const double> y) {
  require_same_length(x, y, 2);
  const auto counts = dominance_counts(dense_ranks(x), dense_ranks(y));
  const double m = static_cast<double>(x.size() - 1);
  KendallDistribution k;
  k.w.reserve(counts.size());
  for (int c : counts) k.w.push_back(static_cast<double>(c) / m);
  std::sort(k.w.begin(), k.w.end());
  return k;
}

double kendall_dist_distance(const KendallDistribution& a, const KendallDistribution& b) {
  if (a.w.empty() || b.w.empty()) throw std::invalid_argument("empty Kendall distribution");
  const double na = static_cast<double>(a.n()), nb = static_cast<double>(b.n());
  std::size_t ia = 0, ib = 0;
  double t = 0.0, total = 0.0;
  // Step functions are right-continuous; walk the merged jump grid.
  while (t < 1.0) {
    while (ia < a.w.size() && a.w[ia] <= t) ++ia;
    while (ib < b.w.size() && b.w[ib] <= t) ++ib;
    double next = 1.0;
    if (ia < a.w.size()) next = std::min(next, a.w[ia]);
    if (ib < b.w.size()) next = std::min(next, b.w[ib]);
    const double diff = static_cast<double>(ia) / na - static_cast<double>(ib) / nb;
    total += diff * diff * (next - t);
    t = next;
  }
  return total;
}

double independence_kendall_cdf(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t - t * std::log(t);
}

double independence_deviation(const KendallDistribution& k) {
  if (k.w.empty()) throw std::invalid_argument("empty Kendall distribution");
  const double n = static_cast<double>(k.n());
  std::size_t i = 0;
  double t = 0.0, total = 0.0;
  while (t < 1.0) {
    while (i < k.w.size() && k.w[i] <= t) ++i;
    const double next = i < k.w.size() ? std::min(1.0, k.w[i]) : 1.0;
    const double c = static_cast<double>(i) / n;
    total += c * c * (next - t) - 2.0 * c * (indep_cdf_integral(next) - indep_cdf_integral(t)) +
             (indep_cdf_sq_integral(next) - indep_cdf_sq_integral(t));
    t = next;
  }
  return std::max(0.0, total);
}

double independence_deviation(std::span<const double> x, std::span<const double> y) {
  return independence_deviation(empirical_kendall_distribution(x, y));
}

double hoeffding_d(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, 5);
  const std::size_t n = x.size();
  const auto r = average_ranks(x);
  const auto s = average_ranks(y);
  const auto rx = dense_ranks(x);
  const auto ry = dense_ranks(y);

  // q[i] = 1 + #{x<, y<} + (#{x=, y<} + #{x<, y=}) / 2 + #{x=, y=, j != i} / 4
  std::vector<double> q(n, 1.0);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return rx[a] < rx[b] || (rx[a] == rx[b] && ry[a] < ry[b]);
  });
  const int max_y = *std::max_element(ry.begin(), ry.end());
  CountTree tree(static_cast<std::size_t>(max_y) + 1);
  std::size_t lo = 0;
  while (lo < n) {
    std::size_t hi = lo + 1;
    while (hi < n && rx[idx[hi]] == rx[idx[lo]]) ++hi;
    // Within the x-group members are sorted by y rank.
    std::size_t k = lo;
    while (k < hi) {
      std::size_t m = k + 1;
      while (m < hi && ry[idx[m]] == ry[idx[k]]) ++m;
      const auto yr = static_cast<std::size_t>(ry[idx[k]]);
      const double both_less = static_cast<double>(tree.below(yr));
      const double x_less_y_equal = static_cast<double>(tree.below(yr + 1)) - both_less;
      const double x_equal_y_less = static_cast<double>(k - lo);
      const double both_equal = static_cast<double>(m - k - 1);
      for (std::size_t t = k; t < m; ++t)
        q[idx[t]] += both_less + 0.5 * (x_equal_y_less + x_less_y_equal) + 0.25 * both_equal;
      k = m;
    }
    for (std::size_t t = lo; t < hi; ++t) tree.add(static_cast<std::size_t>(ry[idx[t]]));
    lo = hi;
  }

  long double d1 = 0, d2 = 0, d3 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double qi = q[i], ri = r[i], si = s[i];
    d1 += (qi - 1) * (qi - 2);
    d2 += (ri - 1) * (ri - 2) * (si - 1) * (si - 2);
    d3 += (ri - 2) * (si - 2) * (qi - 1);
  }
  const long double nn = static_cast<long double>(n);
  const long double num = (nn - 2) * (nn - 3) * d1 + d2 - 2 * (nn - 2) * d3;
  const long double den = nn * (nn - 1) * (nn - 2) * (nn - 3) * (nn - 4);
  return static_cast<double>(30 * num / den);
}

DependenceMatrix dependence_matrix(const PseudoObservations& u, DependenceKind kind) {
  const Eigen::Index d = u.d();
  const auto n = static_cast<std::size_t>(u.n());
  DependenceMatrix out;
  out.kind = kind;
  out.labels = u.labels;
  out.values = Eigen::MatrixXd::Zero(d, d);

  switch (kind) {
    case DependenceKind::KT: {
      const Eigen::MatrixXd tau = kendall_matrix(u.u);
      out.values = (Eigen::MatrixXd::Ones(d, d) - tau);
      out.values.diagonal().setZero();
      break;
    }
    case DependenceKind::HD: {
      std::vector<double> ramp(n);
      std::iota(ramp.begin(), ramp.end(), 1.0);
      const double d_max = hoeffding_d(ramp, ramp);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j)
          out.values(i, j) = out.values(j, i) = std::max(0.0, d_max - hoeffding_d(u.col(i), u.col(j)));
      break;
    }
    case DependenceKind::KIND: {
      Eigen::MatrixXd dev = Eigen::MatrixXd::Zero(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j)
          dev(i, j) = dev(j, i) = independence_deviation(u.col(i), u.col(j));
      const double top = dev.maxCoeff();
      if (top > 0.0) {
        out.values = (top - dev.array()) / top;
        out.values.diagonal().setZero();
      }
      break;
    }
  }
  return out;
}

DependenceMatrix dependence_matrix(const Dataset& data, DependenceKind kind) {
  return dependence_matrix(pseudo_observations(data), kind);
}

std::string to_string(DependenceKind kind) {
  switch (kind) {
    case DependenceKind::KT: return "kt";
    case DependenceKind::HD: return "hD";
    case DependenceKind::KIND: return "kind";
  }
  return "?";
}

DependenceKind parse_dependence_kind(const std::string& name) {
  const auto key = lower(name);
  if (key == "kt") return DependenceKind::KT;
  if (key == "hd") return DependenceKind::HD;
  if (key == "kind") return DependenceKind::KIND;
  throw std::invalid_argument("unknown dependence kind '" + name + "'");
}

}  // namespace nacest
