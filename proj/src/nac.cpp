#include "nacest/nac.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nacest/errors.hpp"
#include "nacest/newick.hpp"

namespace nacest {

namespace {

// Above this many Sibuya summands the sum is replaced by its stable limit.
constexpr double kStableLimitCount = 2000.0;

GeneratorSpec generator_from_tau(Family family, double tau) {
  if (family == Family::Independence) return GeneratorSpec::from_tau(family, 0.0);
  return GeneratorSpec::from_tau(family, tau);
}

}  // namespace

std::vector<int> node_path(const RootedTree& tree, int node) {
  std::vector<int> path;
  while (node != tree.root()) {
    const int p = tree.parent(node);
    const auto& kids = tree.children(p);
    path.push_back(static_cast<int>(std::find(kids.begin(), kids.end(), node) - kids.begin()));
    node = p;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

int node_at_path(const RootedTree& tree, const std::vector<int>& path) {
  int node = tree.root();
  for (int step : path) {
    const auto& kids = tree.children(node);
    if (step < 0 || step >= static_cast<int>(kids.size())) throw std::invalid_argument("node_path leaves the tree");
    node = kids[step];
  }
  return node;
}

NacSpec NacSpec::from_annotated_newick(const std::string& newick, Family family) {
  NacSpec spec;
  const RootedTree parsed = parse_newick(newick);
  for (int v : parsed.internal_nodes()) {
    const auto& a = parsed.node(v).annotation;
    if (!a && family != Family::Independence)
      throw DataError("internal node without a tau annotation in '" + newick + "'");
    try {
      spec.generators[v] = generator_from_tau(family, a.value_or(0.0));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }
  spec.tree = parsed.without_annotations();
  return spec;
}

NacSpec NacSpec::from_json(const nlohmann::json& value) {
  try {
    if (!value.is_object() || !value.contains("newick")) throw DataError("NAC spec needs a \"newick\" field");
    const std::string newick = value.at("newick").get<std::string>();
    NacSpec spec;
    const RootedTree parsed = parse_newick(newick);
    spec.tree = parsed.without_annotations();
    if (value.contains("family")) {
      const Family family = parse_family(value.at("family").get<std::string>());
      for (int v : parsed.internal_nodes())
        if (parsed.node(v).annotation || family == Family::Independence)
          spec.generators[v] = generator_from_tau(family, parsed.node(v).annotation.value_or(0.0));
    }
    if (value.contains("generators")) {
      for (const auto& g : value.at("generators")) {
        const auto path = g.at("node_path").get<std::vector<int>>();
        const int node = node_at_path(spec.tree, path);
        if (spec.tree.is_leaf(node)) throw DataError("node_path points at a leaf");
        const Family family = parse_family(g.at("family").get<std::string>());
        if (g.contains("tau")) {
          spec.generators[node] = generator_from_tau(family, g.at("tau").get<double>());
        } else if (g.contains("theta")) {
          spec.generators[node] = GeneratorSpec::from_theta(family, g.at("theta").get<double>());
        } else if (family == Family::Independence) {
          spec.generators[node] = generator_from_tau(family, 0.0);
        } else {
          throw DataError("generator entry needs \"tau\"");
        }
      }
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad NAC spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("bad NAC spec: ") + e.what());
  }
}

nlohmann::json NacSpec::to_json() const {
  nlohmann::json out;
  out["newick"] = write_newick(tree);
  out["generators"] = nlohmann::json::array();
  for (const auto& [node, g] : generators) {
    nlohmann::json entry;
    entry["node_path"] = node_path(tree, node);
    entry["family"] = to_string(g.family);
    entry["tau"] = g.tau;
    entry["theta"] = g.theta;
    out["generators"].push_back(entry);
  }
  return out;
}

const GeneratorSpec& NacSpec::generator(int node) const {
  auto it = generators.find(node);
  if (it == generators.end()) throw std::invalid_argument("internal node without a generator");
  return it->second;
}

RootedTree NacSpec::annotated_tree() const {
  std::unordered_map<int, double> values;
  for (const auto& [node, g] : generators) values[node] = g.tau;
  return tree.with_annotations(values);
}

void NacSpec::validate() const {
  if (tree.empty()) throw std::invalid_argument("NAC spec has no tree");
  for (int v : tree.internal_nodes()) {
    generator(v).validate();
  }
  for (const auto& [node, g] : generators)
    if (node < 0 || node >= tree.size() || tree.is_leaf(node))
      throw std::invalid_argument("generator attached to a leaf");
}

NestingReport check_nesting(const NacSpec& spec) {
  spec.validate();
  NestingReport report;
  report.min_tau_gap = std::numeric_limits<double>::infinity();
  auto raise = [&](NestingStatus s, std::string msg) {
    report.status = std::max(report.status, s);
    report.issues.push_back(std::move(msg));
  };
  for (int c : spec.tree.internal_nodes()) {
    if (c == spec.tree.root()) continue;
    const int p = spec.tree.parent(c);
    const auto& gp = spec.generator(p);
    const auto& gc = spec.generator(c);
    const std::string where = "{" + [&] {
      std::string s;
      for (const auto& l : spec.tree.clade(c)) s += (s.empty() ? "" : ",") + l;
      return s;
    }() + "}";
    report.min_tau_gap = std::min(report.min_tau_gap, gc.tau - gp.tau);
    if (gp.family == gc.family) {
      if (gp.family != Family::Independence && gp.theta > gc.theta)
        raise(NestingStatus::Fail, "node " + where + ": parent theta exceeds child theta");
    } else {
      raise(NestingStatus::Warn, "node " + where + ": mixed families " + to_string(gp.family) + "/" +
                                     to_string(gc.family));
    }
    if (gc.tau < gp.tau) raise(NestingStatus::Warn, "node " + where + ": tau decreases down the tree");
  }
  if (!std::isfinite(report.min_tau_gap)) report.min_tau_gap = 0.0;
  return report;
}

std::string to_string(NestingStatus status) {
  switch (status) {
    case NestingStatus::Ok: return "OK";
    case NestingStatus::Warn: return "WARN";
    case NestingStatus::Fail: return "FAIL";
  }
  return "?";
}

double sample_stable(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("stable index must be in (0, 1]");
  if (alpha == 1.0) return 1.0;
  const double u = std::numbers::pi * uniform01(rng);
  const double e = exponential1(rng);
  return std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
}

std::uint64_t sample_sibuya(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("Sibuya index must be in (0, 1]");
  const double u = uniform01(rng);
  // P(X > k) = prod_{j <= k} (1 - alpha / j); X is the first k where it drops below u.
  double survival = 1.0;
  for (std::uint64_t k = 1; k <= 256; ++k) {
    survival *= 1.0 - alpha / static_cast<double>(k);
    if (survival < u) return k;
  }
  const double log_u = std::log(u);
  const double base = std::lgamma(1.0 - alpha);
  auto log_survival = [&](double k) { return std::lgamma(k + 1.0 - alpha) - base - std::lgamma(k + 1.0); };
  double lo = 256.0, hi = 512.0;
  while (log_survival(hi) >= log_u) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) return static_cast<std::uint64_t>(1e18);
  }
  while (hi - lo > 1.0) {
    const double mid = std::floor(0.5 * (lo + hi));
    if (log_survival(mid) < log_u) hi = mid;
    else lo = mid;
  }
  return static_cast<std::uint64_t>(hi);
}

std::uint64_t sample_log_series(double theta, Rng& rng) {
  // Kemp's LK algorithm with p = 1 - exp(-theta).
  const double p = -std::expm1(-theta);
  const double u2 = uniform01(rng);
  if (u2 > p) return 1;
  const double q = -std::expm1(-theta * uniform01(rng));
  if (u2 < q * q) {
    const double k = std::floor(1.0 + std::log(u2) / std::log(q));
    return k < 1.0 ? 1 : static_cast<std::uint64_t>(std::min(k, 1e18));
  }
  return u2 > q ? 1 : 2;
}

double sample_root_frailty(const GeneratorSpec& g, Rng& rng) {
  switch (g.family) {
    case Family::Clayton:
      return std::gamma_distribution<double>(1.0 / g.theta, 1.0)(rng);
    case Family::Gumbel:
      return sample_stable(1.0 / g.theta, rng);
    case Family::Frank:
      return static_cast<double>(sample_log_series(g.theta, rng));
    case Family::Joe:
      return static_cast<double>(sample_sibuya(1.0 / g.theta, rng));
    case Family::Independence:
      return 1.0;
  }
  return 1.0;
}

double sample_inner_frailty(const GeneratorSpec& parent, const GeneratorSpec& child, double v_parent,
                            Rng& rng) {
  if (parent.family == Family::Independence) {
    // exp(-v * (-log psi_c(t))) = psi_c(t)^v with v = 1.
    return sample_root_frailty(child, rng);
  }
  if (parent.family != child.family)
    throw std::invalid_argument("mixed-family nesting is not supported by the sampler");
  const double alpha = parent.theta / child.theta;
  if (alpha > 1.0) throw std::invalid_argument("parent theta exceeds child theta");
  if (alpha == 1.0) return v_parent;

  switch (child.family) {
    case Family::Gumbel:
      return std::pow(v_parent, 1.0 / alpha) * sample_stable(alpha, rng);
    case Family::Clayton: {
      // Exponentially tilted stable, split into pieces so each rejection
      // step accepts with probability at least exp(-1).
      const double m = std::max(1.0, std::ceil(v_parent));
      const double c = v_parent / m;
      const double scale = std::pow(c, 1.0 / alpha);
      double total = 0.0;
      for (double piece = 0; piece < m; ++piece) {
        while (true) {
          const double s = scale * sample_stable(alpha, rng);
          if (uniform01(rng) <= std::exp(-s)) {
            total += s;
            break;
          }
        }
      }
      return total;
    }
    case Family::Frank: {
      const double keep = -std::expm1(-child.theta);
      double total = 0.0;
      for (double draw = 0; draw < v_parent; ++draw) {
        while (true) {
          const auto x = sample_sibuya(alpha, rng);
          if (uniform01(rng) <= std::pow(keep, static_cast<double>(x))) {
            total += static_cast<double>(x);
            break;
          }
        }
      }
      return total;
    }
    case Family::Joe: {
      if (v_parent > kStableLimitCount) return std::pow(v_parent, 1.0 / alpha) * sample_stable(alpha, rng);
      double total = 0.0;
      for (double draw = 0; draw < v_parent; ++draw) total += static_cast<double>(sample_sibuya(alpha, rng));
      return total;
    }
    case Family::Independence:
      return 1.0;
  }
  return v_parent;
}

Dataset sample(const NacSpec& spec, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  const auto report = check_nesting(spec);
  if (report.status == NestingStatus::Fail) throw std::invalid_argument("NAC spec fails the nesting check");
  const RootedTree& tree = spec.tree;
  if (tree.leaf_count() < 2) throw std::invalid_argument("NAC needs at least two leaves");
  for (int c : tree.internal_nodes()) {
    if (c == tree.root()) continue;
    const auto& gp = spec.generator(tree.parent(c));
    if (gp.family != Family::Independence && gp.family != spec.generator(c).family)
      throw std::invalid_argument("mixed-family nesting is not supported by the sampler");
  }

  Dataset out;
  out.column_names = tree.leaf_labels();
  out.values.resize(n, tree.leaf_count());
  std::vector<int> column(tree.size(), -1);
  for (std::size_t i = 0; i < tree.leaves().size(); ++i) column[tree.leaves()[i]] = static_cast<int>(i);

  constexpr double lowest = DBL_MIN;
  const double highest = std::nextafter(1.0, 0.0);
  Rng rng(seed);
  std::vector<double> v(tree.size(), 0.0);
  for (int row = 0; row < n; ++row) {
    // Node ids are in preorder, so parents come first.
    for (int id = 0; id < tree.size(); ++id) {
      if (tree.is_leaf(id)) {
        const int p = tree.parent(id);
        const double u = psi(spec.generator(p), exponential1(rng) / v[p]);
        out.values(row, column[id]) = std::clamp(u, lowest, highest);
      } else if (id == tree.root()) {
        v[id] = sample_root_frailty(spec.generator(id), rng);
      } else {
        const int p = tree.parent(id);
        v[id] = sample_inner_frailty(spec.generator(p), spec.generator(id), v[p], rng);
      }
    }
  }
  return out;
}

}  // namespace nacest
