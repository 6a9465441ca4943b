#include "nacest/study.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nacest/builders.hpp"
#include "nacest/errors.hpp"
#include "nacest/newick.hpp"
#include "nacest/random.hpp"
#include "nacest/triples.hpp"

namespace nacest {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string fig12_newick() {
  // A1..A7: caterpillar on U1..U8 with tau 0.2 .. 0.8.
  std::string a = "(U7,U8)0.8";
  for (int i = 6; i >= 1; --i) a = "(U" + std::to_string(i) + "," + a + ")0." + std::to_string(i + 1);
  return "(" + a +
         ",(U9,U10,U11,U12)0.75"
         ",(U13,U14,U15)0.8"
         ",(U16,U17,U18)0.7"
         ",(U19,U20)0.8"
         ",(U21,U22,(U23,U24,(U25,U26,U27)0.6)0.5)0.3"
         ",(U28,U29,U30,(U31,U32,U33)0.7)0.5"
         ",(U34,U35,U36)0.7"
         ",U37,U38,U39,U40)0.1;";
}

StudyConfig make_config(const std::string& name, const std::string& newick, Family family,
                        std::vector<std::string> estimators) {
  StudyConfig c;
  c.name = name;
  c.nac = NacSpec::from_annotated_newick(newick, family);
  c.estimators = std::move(estimators);
  return c;
}

std::uint64_t replicate_seed(std::uint64_t seed, int n, int replicate) {
  return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(replicate));
}

}  // namespace

std::vector<double> default_grid(CollapseRule rule) {
  if (rule == CollapseRule::KAGG) return {0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.25, 0.3};
  return {0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
}

std::vector<std::string> default_estimators() {
  return {"kt_kagg", "hD_kagg", "kind_kagg", "kt_kb", "NJNNI_kb", "RNix_kb", "SU_baseline"};
}

void StudyConfig::validate() const {
  nac.validate();
  if (nac.tree.leaf_count() < 3) throw std::invalid_argument("study needs at least three variables");
  if (check_nesting(nac).status == NestingStatus::Fail) throw std::invalid_argument("NAC spec fails the nesting check");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (sample_sizes.empty()) throw std::invalid_argument("no sample sizes");
  for (int n : sample_sizes)
    if (n < 5) throw std::invalid_argument("sample sizes must be >= 5");
  if (estimators.empty()) throw std::invalid_argument("no estimators");
  if (bootstrap_B < 1) throw std::invalid_argument("bootstrap B must be >= 1");
  search.validate();
  std::set<std::string> names;
  for (const auto& e : estimators) {
    const auto spec = parse_estimator(e);
    if (!names.insert(spec.name).second) throw std::invalid_argument("estimator '" + e + "' listed twice");
    const auto g = grid(spec);
    if (g.empty()) throw std::invalid_argument("empty threshold grid for " + e);
    for (double t : g) {
      if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("thresholds must be finite and >= 0");
      if (spec.rule == CollapseRule::KB && t > 1.0) throw std::invalid_argument("alpha grid values must be <= 1");
    }
  }
  for (const auto& [name, g] : thresholds) {
    const auto canonical = parse_estimator(name).name;
    if (!names.count(canonical)) throw std::invalid_argument("thresholds given for unused estimator " + name);
  }
}

std::vector<double> StudyConfig::grid(const EstimatorSpec& estimator) const {
  for (const auto& [name, g] : thresholds)
    if (parse_estimator(name).name == estimator.name) return g;
  return default_grid(estimator.rule);
}

StudyConfig StudyConfig::from_json(const nlohmann::json& value) {
  static const std::set<std::string> known{"name", "paper_config", "nac", "sample_sizes", "replicates",
                                           "estimators", "thresholds", "bootstrap_B", "seed", "search",
                                           "record_timing"};
  try {
    if (!value.is_object()) throw DataError("study config must be a JSON object");
    for (const auto& [key, _] : value.items())
      if (!known.count(key)) throw DataError("unknown study config key '" + key + "'");
    StudyConfig c;
    if (value.contains("paper_config")) {
      const auto all = paper_configs();
      const auto name = value.at("paper_config").get<std::string>();
      auto it = all.find(name);
      if (it == all.end()) throw DataError("unknown shipped config '" + name + "'");
      c = it->second;
    } else if (!value.contains("nac")) {
      throw DataError("study config needs \"nac\" or \"paper_config\"");
    }
    if (value.contains("nac")) c.nac = NacSpec::from_json(value.at("nac"));
    if (value.contains("name")) c.name = value.at("name").get<std::string>();
    if (value.contains("sample_sizes")) c.sample_sizes = value.at("sample_sizes").get<std::vector<int>>();
    if (value.contains("replicates")) c.replicates = value.at("replicates").get<int>();
    if (value.contains("estimators")) c.estimators = value.at("estimators").get<std::vector<std::string>>();
    if (value.contains("thresholds"))
      c.thresholds = value.at("thresholds").get<std::map<std::string, std::vector<double>>>();
    if (value.contains("bootstrap_B")) c.bootstrap_B = value.at("bootstrap_B").get<int>();
    if (value.contains("seed")) c.seed = value.at("seed").get<std::uint64_t>();
    if (value.contains("record_timing")) c.record_timing = value.at("record_timing").get<bool>();
    if (value.contains("search")) {
      const auto& s = value.at("search");
      for (const auto& [key, _] : s.items())
        if (key != "max_rounds" && key != "ratchet_iterations" && key != "ratchet_reweight_fraction" &&
            key != "ratchet_weight_factor")
          throw DataError("unknown search key '" + key + "'");
      if (s.contains("max_rounds")) c.search.max_rounds = s.at("max_rounds").get<int>();
      if (s.contains("ratchet_iterations")) c.search.ratchet_iterations = s.at("ratchet_iterations").get<int>();
      if (s.contains("ratchet_reweight_fraction"))
        c.search.ratchet_reweight_fraction = s.at("ratchet_reweight_fraction").get<double>();
      if (s.contains("ratchet_weight_factor"))
        c.search.ratchet_weight_factor = s.at("ratchet_weight_factor").get<double>();
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad study config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("bad study config: ") + e.what());
  }
}

nlohmann::json StudyConfig::to_json() const {
  nlohmann::json out;
  out["name"] = name;
  out["nac"] = nac.to_json();
  out["sample_sizes"] = sample_sizes;
  out["replicates"] = replicates;
  out["estimators"] = estimators;
  nlohmann::json grids = nlohmann::json::object();
  for (const auto& e : estimators) grids[parse_estimator(e).name] = grid(parse_estimator(e));
  out["thresholds"] = grids;
  out["bootstrap_B"] = bootstrap_B;
  out["seed"] = seed;
  out["search"] = {{"max_rounds", search.max_rounds},
                   {"ratchet_iterations", search.ratchet_iterations},
                   {"ratchet_reweight_fraction", search.ratchet_reweight_fraction},
                   {"ratchet_weight_factor", search.ratchet_weight_factor}};
  out["record_timing"] = record_timing;
  return out;
}

double summary_measure(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return mean * mean + var / n;
}

std::vector<StudyCell> StudyResult::cells() const {
  std::vector<StudyCell> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const StudyCell& c) {
      return c.estimator == r.estimator && c.n == r.n && c.threshold == r.threshold;
    });
    if (it == out.end()) {
      StudyCell c;
      c.estimator = r.estimator;
      c.n = r.n;
      c.threshold = r.threshold;
      out.push_back(c);
      it = out.end() - 1;
    }
    it->dist01.push_back(r.dist01);
    it->dist_tri.push_back(r.dist_tri);
    it->mean_millis += r.millis;
    if (r.error) ++it->errors;
  }
  for (auto& c : out) {
    const double n = static_cast<double>(c.dist01.size());
    c.mean01 = std::accumulate(c.dist01.begin(), c.dist01.end(), 0.0) / n;
    c.mean_tri = std::accumulate(c.dist_tri.begin(), c.dist_tri.end(), 0.0) / n;
    c.summary01 = summary_measure(c.dist01);
    c.summary_tri = summary_measure(c.dist_tri);
    c.mean_millis /= n;
  }
  return out;
}

RootedTree su_baseline_estimate(const PseudoObservations& u, double alpha, int B, std::uint64_t seed) {
  TripleTester tester(u, B, seed);
  TripleSet triples = estimate_triples(u);
  const int d = triples.label_count();
  std::vector<int> col(d);
  for (int i = 0; i < d; ++i) col[i] = u.column(triples.labels()[i]);
  for (int k = 2; k < d; ++k)
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < j; ++i)
        if (tester.p_value(col[i], col[j], col[k]) > alpha) triples.set_fan(i, j, k);
  return reconstruct(triples);
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  StudyResult result;
  result.name = config.name;
  result.seed = config.seed;
  const RootedTree& truth = config.nac.tree;
  result.d = truth.leaf_count();
  const double worst_tri = static_cast<double>(binomial3(result.d));

  std::vector<EstimatorSpec> specs;
  for (const auto& e : config.estimators) specs.push_back(parse_estimator(e));

  struct Keyed {
    std::size_t estimator;
    std::size_t n_index;
    std::size_t threshold_index;
    StudyRecord record;
  };
  std::vector<Keyed> rows;

  for (std::size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
    const int n = config.sample_sizes[ni];
    for (int rep = 0; rep < config.replicates; ++rep) {
      const std::uint64_t sample_seed = replicate_seed(config.seed, n, rep);
      const Dataset data = sample(config.nac, n, sample_seed);
      const PseudoObservations u = pseudo_observations(data);
      for (std::size_t ei = 0; ei < specs.size(); ++ei) {
        const auto& spec = specs[ei];
        const auto grid = config.grid(spec);
        const std::uint64_t est_seed = derive_seed(sample_seed, fnv1a(spec.name));
        auto emit = [&](std::size_t ti, const RootedTree* tree, double millis) {
          StudyRecord r;
          r.estimator = spec.name;
          r.n = n;
          r.threshold = grid[ti];
          r.replicate = rep;
          r.millis = config.record_timing ? millis : 0.0;
          if (tree) {
            r.dist01 = tree_distance_01(truth, *tree);
            r.dist_tri = static_cast<double>(tree_distance_tri(truth, *tree));
          } else {
            r.dist01 = 1.0;
            r.dist_tri = worst_tri;
            r.error = true;
          }
          rows.push_back({ei, ni, ti, r});
        };

        // Step one and the test cache are shared by every threshold.
        try {
          const auto t0 = Clock::now();
          if (spec.baseline) {
            TripleTester tester(u, config.bootstrap_B, est_seed);
            const TripleSet estimated = estimate_triples(u);
            const int d = estimated.label_count();
            std::vector<int> col(d);
            for (int i = 0; i < d; ++i) col[i] = u.column(estimated.labels()[i]);
            std::vector<double> p;
            for (int k = 2; k < d; ++k)
              for (int j = 1; j < k; ++j)
                for (int i = 0; i < j; ++i) p.push_back(tester.p_value(col[i], col[j], col[k]));
            const double shared = elapsed_ms(t0);
            for (std::size_t ti = 0; ti < grid.size(); ++ti) {
              const auto t1 = Clock::now();
              TripleSet triples = estimated;
              std::size_t at = 0;
              for (int k = 2; k < d; ++k)
                for (int j = 1; j < k; ++j)
                  for (int i = 0; i < j; ++i)
                    if (p[at++] > grid[ti]) triples.set_fan(i, j, k);
              const RootedTree tree = reconstruct(triples);
              emit(ti, &tree, shared + elapsed_ms(t1));
            }
          } else {
            SearchConfig search = config.search;
            search.seed = est_seed;
            const RootedTree binary = build_binary(u, spec.method, search);
            if (spec.rule == CollapseRule::KAGG) {
              const Eigen::MatrixXd tau = kendall_matrix(u.u);
              const double shared = elapsed_ms(t0);
              for (std::size_t ti = 0; ti < grid.size(); ++ti) {
                const auto t1 = Clock::now();
                const RootedTree tree = collapse_kagg(binary, tau, u.labels, grid[ti]);
                emit(ti, &tree, shared + elapsed_ms(t1));
              }
            } else {
              TripleTester tester(u, config.bootstrap_B, derive_seed(est_seed, 1));
              const double shared = elapsed_ms(t0);
              for (std::size_t ti = 0; ti < grid.size(); ++ti) {
                const auto t1 = Clock::now();
                const RootedTree tree = collapse_kb(binary, tester, grid[ti]);
                emit(ti, &tree, shared + elapsed_ms(t1));
              }
            }
          }
        } catch (const std::exception&) {
          for (std::size_t ti = 0; ti < grid.size(); ++ti)
            if (std::none_of(rows.begin(), rows.end(), [&](const Keyed& k) {
                  return k.estimator == ei && k.n_index == ni && k.threshold_index == ti &&
                         k.record.replicate == rep;
                }))
              emit(ti, nullptr, 0.0);
        }
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.estimator, a.n_index, a.threshold_index, a.record.replicate) <
           std::tie(b.estimator, b.n_index, b.threshold_index, b.record.replicate);
  });
  for (auto& k : rows) result.records.push_back(std::move(k.record));
  return result;
}

double optimal_threshold(const StudyResult& result, const std::string& estimator, int n) {
  const std::string name = parse_estimator(estimator).name;
  bool found = false;
  double best_threshold = 0.0, best_mean = 0.0;
  for (const auto& c : result.cells()) {
    if (c.estimator != name || c.n != n) continue;
    if (!found || c.mean01 < best_mean || (c.mean01 == best_mean && c.threshold < best_threshold)) {
      best_mean = c.mean01;
      best_threshold = c.threshold;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("no results for " + estimator + " at n = " + std::to_string(n));
  return best_threshold;
}

std::map<std::string, StudyConfig> paper_configs() {
  std::map<std::string, StudyConfig> out;
  const auto all = default_estimators();
  const char* side[] = {"left", "middle", "right"};
  const double low[] = {0.4, 0.3, 0.2};
  const double high[] = {0.6, 0.7, 0.8};
  for (int i = 0; i < 3; ++i) {
    const std::string r = format_double(low[i]), h = format_double(high[i]);
    out["fig7_" + std::string(side[i])] =
        make_config("fig7_" + std::string(side[i]), "((U1,U2)" + h + ",(U3,U4)" + h + ")" + r + ";",
                    Family::Clayton, all);
    out["fig8_" + std::string(side[i])] = make_config("fig8_" + std::string(side[i]),
                                                      "(U1,U2,(U3,U4)" + h + ")" + r + ";", Family::Clayton, all);
    out["fig9_" + std::string(side[i])] = make_config(
        "fig9_" + std::string(side[i]), "(U1,U2,((U3,U4)" + h + ",U5)0.5)" + r + ";", Family::Gumbel, all);
  }
  out["fig10_left"] = make_config("fig10_left", "((U1,(U2,U3)0.65)0.5,(U4,(U5,(U6,U7)0.65)0.55)0.45)0.35;",
                                  Family::Frank, all);
  out["fig10_right"] = make_config("fig10_right", "((U1,(U2,U3)0.8)0.5,(U4,(U5,(U6,U7)0.8)0.6)0.4)0.2;",
                                   Family::Frank, all);
  out["fig11"] = make_config(
      "fig11", "((U1,U2,(U3,U4,U5)0.5)0.25,(U6,(U7,U8)0.45)0.35,((U9,U10,U11,U12,U13)0.75,U14,U15)0.5)0.1;",
      Family::Joe, all);
  out["fig12"] = make_config("fig12", fig12_newick(), Family::Gumbel, {"kt_kagg"});
  return out;
}

void write_results_csv(std::ostream& out, const StudyResult& result) {
  out << "estimator,n,threshold,replicate,dist01,distTri,millis\n";
  for (const auto& r : result.records)
    out << r.estimator << ',' << r.n << ',' << fmt17(r.threshold) << ',' << r.replicate << ','
        << fmt17(r.dist01) << ',' << fmt17(r.dist_tri) << ',' << fmt17(r.millis) << '\n';
}

std::vector<StudyRecord> read_results_csv(std::istream& in) {
  std::vector<StudyRecord> out;
  std::string line;
  if (!std::getline(in, line) || line.rfind("estimator,n,threshold,replicate,dist01,distTri,millis", 0) != 0)
    throw DataError("not a study results CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw DataError("results row with " + std::to_string(cells.size()) + " cells");
    StudyRecord r;
    try {
      r.estimator = cells[0];
      r.n = std::stoi(cells[1]);
      r.threshold = std::stod(cells[2]);
      r.replicate = std::stoi(cells[3]);
      r.dist01 = std::stod(cells[4]);
      r.dist_tri = std::stod(cells[5]);
      r.millis = std::stod(cells[6]);
    } catch (const std::exception&) {
      throw DataError("bad results row: " + line);
    }
    out.push_back(r);
  }
  return out;
}

nlohmann::json summary_json(const StudyResult& result) {
  nlohmann::json out;
  out["name"] = result.name;
  out["d"] = result.d;
  out["seed"] = result.seed;
  out["max_tri"] = binomial3(result.d);
  out["cells"] = nlohmann::json::array();
  for (const auto& c : result.cells()) {
    out["cells"].push_back({{"estimator", c.estimator},
                            {"n", c.n},
                            {"threshold", c.threshold},
                            {"replicates", c.dist01.size()},
                            {"mean01", c.mean01},
                            {"mean_tri", c.mean_tri},
                            {"summary01", c.summary01},
                            {"summary_tri", c.summary_tri},
                            {"mean_millis", c.mean_millis},
                            {"errors", c.errors}});
  }
  nlohmann::json optimal = nlohmann::json::array();
  std::vector<std::pair<std::string, int>> seen;
  for (const auto& c : result.cells()) {
    const auto key = std::make_pair(c.estimator, c.n);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    const double t = optimal_threshold(result, c.estimator, c.n);
    double mean = 0.0;
    for (const auto& x : result.cells())
      if (x.estimator == c.estimator && x.n == c.n && x.threshold == t) mean = x.mean01;
    optimal.push_back({{"estimator", c.estimator}, {"n", c.n}, {"threshold", t}, {"mean01", mean}});
  }
  out["optimal"] = optimal;
  return out;
}

}  // namespace nacest
