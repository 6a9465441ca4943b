#include "nacest/builders.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nacest {

RootedTree average_linkage(const Eigen::MatrixXd& dist, const std::vector<std::string>& labels) {
  const int d = static_cast<int>(labels.size());
  if (d < 1) throw std::invalid_argument("average linkage needs at least one label");
  if (dist.rows() != d || dist.cols() != d) throw std::invalid_argument("distance matrix size mismatch");
  if (!dist.allFinite()) throw std::invalid_argument("distance matrix is not finite");
  if ((dist - dist.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("distance matrix is not symmetric");

  TreeBuilder builder;
  std::vector<int> node;
  std::vector<std::string> key;
  std::vector<double> weight;
  for (int i = 0; i < d; ++i) {
    node.push_back(builder.leaf(labels[i]));
    key.push_back(labels[i]);
    weight.push_back(1.0);
  }
  Eigen::MatrixXd D = dist;
  std::vector<bool> alive(d, true);
  for (int step = 0; step + 1 < d; ++step) {
    int bi = -1, bj = -1;
    double best = 0.0;
    for (int i = 0; i < d; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < d; ++j) {
        if (!alive[j]) continue;
        const double v = D(i, j);
        bool take = bi < 0 || v < best - 1e-12;
        if (!take && std::abs(v - best) <= 1e-12)
          take = std::minmax(key[i], key[j]) < std::minmax(key[bi], key[bj]);
        if (take) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    for (int k = 0; k < d; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double merged = (weight[bi] * D(bi, k) + weight[bj] * D(bj, k)) / (weight[bi] + weight[bj]);
      D(bi, k) = D(k, bi) = merged;
    }
    node[bi] = builder.internal({node[bi], node[bj]});
    key[bi] = std::min(key[bi], key[bj]);
    weight[bi] += weight[bj];
    alive[bj] = false;
  }
  const int root = static_cast<int>(std::find(alive.begin(), alive.end(), true) - alive.begin());
  return builder.build(node[root]);
}

RootedTree average_linkage(const DependenceMatrix& m) { return average_linkage(m.values, m.labels); }

KendallCache::KendallCache(const PseudoObservations& u) : u_(u) {
  const auto d = static_cast<std::size_t>(u.d());
  cache_.resize(d * d);
  ready_.assign(d * d, false);
}

const KendallDistribution& KendallCache::get(int a, int b) {
  if (a > b) std::swap(a, b);
  const std::size_t at = static_cast<std::size_t>(a) * static_cast<std::size_t>(u_.d()) + b;
  if (!ready_[at]) {
    cache_[at] = empirical_kendall_distribution(u_.col(a), u_.col(b));
    ready_[at] = true;
  }
  return cache_[at];
}

int closest_pair_outlier(KendallCache& cache, int a, int b, int c) {
  const auto& kab = cache.get(a, b);
  const auto& kac = cache.get(a, c);
  const auto& kbc = cache.get(b, c);
  // The closest pair of distributions shares one variable: the outlier.
  const double around_a = kendall_dist_distance(kab, kac);
  const double around_b = kendall_dist_distance(kab, kbc);
  const double around_c = kendall_dist_distance(kac, kbc);
  int pos = 0;
  double best = around_a;
  if (around_b < best) {
    pos = 1;
    best = around_b;
  }
  if (around_c < best) pos = 2;
  return pos;
}

TripleShape trivariate_binary_estimate(const PseudoObservations& u, const std::string& i,
                                       const std::string& j, const std::string& k) {
  if (i == j || j == k || i == k) throw std::invalid_argument("triple labels must be distinct");
  std::array<std::string, 3> s{i, j, k};
  std::sort(s.begin(), s.end());
  std::array<int, 3> col{u.column(s[0]), u.column(s[1]), u.column(s[2])};
  KendallCache cache(u);
  const int out = closest_pair_outlier(cache, col[0], col[1], col[2]);
  std::vector<std::string> pair;
  for (int p = 0; p < 3; ++p)
    if (p != out) pair.push_back(s[p]);
  return TripleShape::cherry(pair[0], pair[1], s[out]);
}

TripleSet estimate_triples(const PseudoObservations& u) {
  auto labels = u.labels;
  std::sort(labels.begin(), labels.end());
  const int d = static_cast<int>(labels.size());
  if (d < 3) throw std::invalid_argument("triple estimation needs at least three columns");
  std::vector<int> col(d);
  for (int i = 0; i < d; ++i) col[i] = u.column(labels[i]);
  KendallCache cache(u);
  TripleSet out(labels);
  for (int k = 2; k < d; ++k)
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < j; ++i)
        out.set_code(i, j, k, static_cast<std::int8_t>(closest_pair_outlier(cache, col[i], col[j], col[k])));
  return out;
}

std::string to_string(BinaryMethod method) {
  switch (method) {
    case BinaryMethod::KT: return "kt";
    case BinaryMethod::HD: return "hD";
    case BinaryMethod::KIND: return "kind";
    case BinaryMethod::NJNNI: return "NJNNI";
    case BinaryMethod::RNIX: return "RNix";
  }
  return "?";
}

BinaryMethod parse_binary_method(const std::string& name) {
  std::string key = name;
  for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "kt") return BinaryMethod::KT;
  if (key == "hd") return BinaryMethod::HD;
  if (key == "kind") return BinaryMethod::KIND;
  if (key == "njnni") return BinaryMethod::NJNNI;
  if (key == "rnix") return BinaryMethod::RNIX;
  throw std::invalid_argument("unknown binary method '" + name + "'");
}

RootedTree supertree_njnni(const PseudoObservations& u, const SearchConfig& config) {
  return supertree_from_triples(estimate_triples(u), StartTree::NeighborJoining, config);
}

RootedTree supertree_rnix(const PseudoObservations& u, const SearchConfig& config) {
  return supertree_from_triples(estimate_triples(u), StartTree::Random, config);
}

RootedTree build_binary(const PseudoObservations& u, BinaryMethod method, const SearchConfig& config) {
  switch (method) {
    case BinaryMethod::KT: return average_linkage(dependence_matrix(u, DependenceKind::KT));
    case BinaryMethod::HD: return average_linkage(dependence_matrix(u, DependenceKind::HD));
    case BinaryMethod::KIND: return average_linkage(dependence_matrix(u, DependenceKind::KIND));
    case BinaryMethod::NJNNI: return supertree_njnni(u, config);
    case BinaryMethod::RNIX: return supertree_rnix(u, config);
  }
  throw std::invalid_argument("unknown binary method");
}

}  // namespace nacest
