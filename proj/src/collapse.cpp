#include "nacest/collapse.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "nacest/random.hpp"

namespace nacest {

void CollapseConfig::validate() const {
  if (!(tau_c >= 0.0) || !std::isfinite(tau_c)) throw std::invalid_argument("tau_c must be a finite value >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
  if (bootstrap_B < 1) throw std::invalid_argument("bootstrap B must be >= 1");
}

namespace {

std::unordered_map<std::string, int> index_of(const std::vector<std::string>& labels) {
  std::unordered_map<std::string, int> out;
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) out.emplace(labels[i], i);
  return out;
}

double mean_tau_indexed(const RootedTree& tree, int node, const Eigen::MatrixXd& tau,
                        const std::vector<int>& column_of_node) {
  const auto& kids = tree.children(node);
  std::vector<std::vector<int>> groups;
  for (int c : kids) {
    std::vector<int> cols;
    for (int leaf : tree.leaves_below(c)) cols.push_back(column_of_node[leaf]);
    groups.push_back(std::move(cols));
  }
  double sum = 0.0;
  long count = 0;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t h = g + 1; h < groups.size(); ++h)
      for (int a : groups[g])
        for (int b : groups[h]) {
          sum += tau(a, b);
          ++count;
        }
  return sum / static_cast<double>(count);
}

std::vector<int> leaf_columns(const RootedTree& tree, const std::vector<std::string>& labels) {
  const auto index = index_of(labels);
  std::vector<int> out(tree.size(), -1);
  for (int leaf : tree.leaves()) {
    auto it = index.find(tree.node(leaf).label);
    if (it == index.end()) throw std::invalid_argument("tree leaf '" + tree.node(leaf).label + "' has no data column");
    out[leaf] = it->second;
  }
  return out;
}

// Step CDF of the Kendall scores on the grid k / (n - 1), k = 0..n-2.
void grid_cdf(const std::vector<int>& rx, const std::vector<int>& ry, std::vector<double>& cdf,
              std::vector<int>& hist) {
  const std::size_t n = rx.size();
  const auto counts = dominance_counts(rx, ry);
  hist.assign(n, 0);
  for (int c : counts) ++hist[static_cast<std::size_t>(c)];
  cdf.resize(n - 1);
  long run = 0;
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    run += hist[k];
    cdf[k] = static_cast<double>(run) * scale;
  }
}

double grid_distance(const std::vector<double>& f, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double diff = f[k] - g[k];
    s += diff * diff;
  }
  return s / static_cast<double>(f.size());
}

// f[0] = K_ab, f[1] = K_ac, f[2] = K_bc.
double triple_statistic(const std::array<std::vector<double>, 3>& f, std::vector<double>& scratch) {
  const double d01 = grid_distance(f[0], f[1]);
  const double d02 = grid_distance(f[0], f[2]);
  const double d12 = grid_distance(f[1], f[2]);
  int p = 0, q = 1, r = 2;
  double best = d01;
  if (d02 < best) {
    best = d02;
    p = 0, q = 2, r = 1;
  }
  if (d12 < best) p = 1, q = 2, r = 0;
  scratch.resize(f[0].size());
  for (std::size_t k = 0; k < scratch.size(); ++k) scratch[k] = 0.5 * (f[p][k] + f[q][k]);
  return grid_distance(scratch, f[r]);
}

}  // namespace

double triple_test_p_value(const std::vector<int>& ra, const std::vector<int>& rb,
                           const std::vector<int>& rc, int B, std::uint64_t seed) {
  const std::size_t n = ra.size();
  if (rb.size() != n || rc.size() != n) throw std::invalid_argument("columns differ in length");
  if (n < 3) throw std::invalid_argument("triple test needs at least three rows");
  if (B < 1) throw std::invalid_argument("bootstrap B must be >= 1");

  std::vector<int> hist;
  std::vector<double> scratch;
  std::array<std::vector<double>, 3> full, boot;
  grid_cdf(ra, rb, full[0], hist);
  grid_cdf(ra, rc, full[1], hist);
  grid_cdf(rb, rc, full[2], hist);
  const double t = triple_statistic(full, scratch);

  Rng rng(seed);
  std::vector<int> xa(n), xb(n), xc(n);
  long exceed = 0;
  for (int b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<std::size_t>(uniform_index(rng, n));
      xa[i] = ra[row];
      xb[i] = rb[row];
      xc[i] = rc[row];
    }
    grid_cdf(xa, xb, boot[0], hist);
    grid_cdf(xa, xc, boot[1], hist);
    grid_cdf(xb, xc, boot[2], hist);
    for (int p = 0; p < 3; ++p)
      for (std::size_t k = 0; k < boot[p].size(); ++k) boot[p][k] -= full[p][k];
    if (triple_statistic(boot, scratch) >= t) ++exceed;
  }
  return static_cast<double>(1 + exceed) / static_cast<double>(B + 1);
}

TripleTester::TripleTester(const PseudoObservations& u, int B, std::uint64_t seed)
    : u_(u), B_(B), seed_(seed) {
  if (B < 1) throw std::invalid_argument("bootstrap B must be >= 1");
  for (Eigen::Index j = 0; j < u.d(); ++j) ranks_.push_back(dense_ranks(u.col(j)));
}

double TripleTester::p_value(int a, int b, int c) {
  std::array<int, 3> cols{a, b, c};
  std::sort(cols.begin(), cols.end(),
            [&](int x, int y) { return u_.labels[x] < u_.labels[y]; });
  if (cols[0] == cols[1] || cols[1] == cols[2]) throw std::invalid_argument("triple columns must be distinct");
  const auto key = std::make_tuple(cols[0], cols[1], cols[2]);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const std::string name = u_.labels[cols[0]] + '\x1f' + u_.labels[cols[1]] + '\x1f' + u_.labels[cols[2]];
  const double p = triple_test_p_value(ranks_[cols[0]], ranks_[cols[1]], ranks_[cols[2]], B_,
                                       derive_seed(seed_, fnv1a(name)));
  cache_.emplace(key, p);
  return p;
}

double su_triple_test(const PseudoObservations& u, const std::string& i, const std::string& j,
                      const std::string& k, int B, std::uint64_t seed) {
  if (i == j || j == k || i == k) throw std::invalid_argument("triple labels must be distinct");
  TripleTester tester(u, B, seed);
  return tester.p_value(u.column(i), u.column(j), u.column(k));
}

NodeSummary node_tau_summary(const RootedTree& tree, int node, const PseudoObservations& u) {
  if (node < 0 || node >= tree.size() || tree.is_leaf(node))
    throw std::invalid_argument("node summary needs an internal node");
  const auto cols = leaf_columns(tree, u.labels);
  const auto& kids = tree.children(node);
  double sum = 0.0;
  long count = 0;
  for (std::size_t g = 0; g < kids.size(); ++g)
    for (std::size_t h = g + 1; h < kids.size(); ++h)
      for (int a : tree.leaves_below(kids[g]))
        for (int b : tree.leaves_below(kids[h])) {
          sum += kendall_tau(u.col(cols[a]), u.col(cols[b]));
          ++count;
        }
  return {node, sum / static_cast<double>(count)};
}

double mean_tau(const RootedTree& tree, int node, const Eigen::MatrixXd& tau,
                const std::vector<std::string>& labels) {
  if (node < 0 || node >= tree.size() || tree.is_leaf(node))
    throw std::invalid_argument("node summary needs an internal node");
  return mean_tau_indexed(tree, node, tau, leaf_columns(tree, labels));
}

RootedTree annotate_mean_tau(const RootedTree& tree, const PseudoObservations& u) {
  const Eigen::MatrixXd tau = kendall_matrix(u.u);
  const auto cols = leaf_columns(tree, u.labels);
  std::unordered_map<int, double> values;
  for (int v : tree.internal_nodes()) values[v] = mean_tau_indexed(tree, v, tau, cols);
  return tree.with_annotations(values);
}

RootedTree collapse_kagg(const RootedTree& tree, const PseudoObservations& u, double tau_c) {
  if (!(tau_c > 0.0)) return tree;
  return collapse_kagg(tree, kendall_matrix(u.u), u.labels, tau_c);
}

RootedTree collapse_kagg(const RootedTree& tree, const Eigen::MatrixXd& tau,
                         const std::vector<std::string>& labels, double tau_c) {
  RootedTree current = tree;
  if (!(tau_c > 0.0)) return current;
  while (true) {
    const auto cols = leaf_columns(current, labels);
    std::vector<double> m(current.size(), 0.0);
    for (int v : current.internal_nodes()) m[v] = mean_tau_indexed(current, v, tau, cols);
    int pick = -1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::string> pick_clade;
    for (int v : current.internal_nodes()) {
      if (v == current.root()) continue;
      const double diff = std::abs(m[current.parent(v)] - m[v]);
      if (diff > best) continue;
      auto clade = current.clade(v);
      if (diff < best || clade < pick_clade) {
        best = diff;
        pick = v;
        pick_clade = std::move(clade);
      }
    }
    if (pick < 0 || !(best < tau_c)) break;
    current = collapse_edge(current, pick);
  }
  return current;
}

RootedTree collapse_kb(const RootedTree& tree, const PseudoObservations& u, double alpha, int B,
                       std::uint64_t seed) {
  TripleTester tester(u, B, seed);
  return collapse_kb(tree, tester, alpha);
}

RootedTree collapse_kb(const RootedTree& tree, TripleTester& tester, double alpha) {
  RootedTree current = tree;
  if (alpha >= 1.0) return current;  // p-values never exceed 1
  bool changed = true;
  while (changed) {
    changed = false;
    const auto cols = leaf_columns(current, tester.data().labels);
    struct Candidate {
      int node;
      int depth;
      std::vector<std::string> clade;
    };
    std::vector<Candidate> candidates;
    for (int v : current.internal_nodes())
      if (v != current.root()) candidates.push_back({v, current.depth(v), current.clade(v)});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return a.depth != b.depth ? a.depth > b.depth : a.clade < b.clade;
    });
    for (const auto& cand : candidates) {
      const int c = cand.node;
      const int p = current.parent(c);
      const auto below_c = current.leaves_below(c);
      std::vector<int> outside;
      for (int leaf : current.leaves_below(p))
        if (std::find(below_c.begin(), below_c.end(), leaf) == below_c.end()) outside.push_back(leaf);
      // Triples that turn from cherry into fan when c merges into p.
      const auto& kids = current.children(c);
      double sum = 0.0;
      long count = 0;
      for (std::size_t g = 0; g < kids.size(); ++g)
        for (std::size_t h = g + 1; h < kids.size(); ++h)
          for (int a : current.leaves_below(kids[g]))
            for (int b : current.leaves_below(kids[h]))
              for (int x : outside) {
                sum += tester.p_value(cols[a], cols[b], cols[x]);
                ++count;
              }
      if (sum / static_cast<double>(count) > alpha) {
        current = collapse_edge(current, c);
        changed = true;
        break;
      }
    }
  }
  return current;
}

RootedTree collapse(const RootedTree& tree, const PseudoObservations& u, const CollapseConfig& config) {
  config.validate();
  if (config.rule == CollapseRule::KAGG) return collapse_kagg(tree, u, config.tau_c);
  return collapse_kb(tree, u, config.alpha, config.bootstrap_B, config.seed);
}

std::string to_string(CollapseRule rule) { return rule == CollapseRule::KAGG ? "kagg" : "kb"; }

EstimatorSpec parse_estimator(const std::string& name) {
  EstimatorSpec spec;
  spec.name = name;
  std::string key = name;
  for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "su_baseline" || key == "su") {
    spec.name = "SU_baseline";
    spec.baseline = true;
    spec.rule = CollapseRule::KB;
    return spec;
  }
  const auto cut = name.rfind('_');
  if (cut == std::string::npos) throw std::invalid_argument("estimator '" + name + "' is not <method>_<rule>");
  spec.method = parse_binary_method(name.substr(0, cut));
  const std::string rule = key.substr(cut + 1);
  if (rule == "kagg") spec.rule = CollapseRule::KAGG;
  else if (rule == "kb") spec.rule = CollapseRule::KB;
  else throw std::invalid_argument("unknown collapse rule in '" + name + "'");
  spec.name = to_string(spec.method) + "_" + to_string(spec.rule);
  return spec;
}

RootedTree estimate_structure(const Dataset& data, BinaryMethod method, const CollapseConfig& config,
                              const SearchConfig& search) {
  const auto u = pseudo_observations(data);
  return collapse(build_binary(u, method, search), u, config);
}

}  // namespace nacest
