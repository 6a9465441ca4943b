// nacest: estimate, sample and compare nested Archimedean copula structures.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nacest/builders.hpp"
#include "nacest/collapse.hpp"
#include "nacest/csv.hpp"
#include "nacest/errors.hpp"
#include "nacest/nac.hpp"
#include "nacest/newick.hpp"
#include "nacest/study.hpp"
#include "nacest/triples.hpp"

namespace fs = std::filesystem;
using namespace nacest;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void log(const std::string& msg) { std::cerr << "nacest: " << msg << '\n'; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// A path to a Newick file, or Newick text itself.
RootedTree load_tree(const std::string& arg) {
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) return parse_newick(slurp(arg));
  return parse_newick(arg);
}

std::string round2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

// Newick with internal annotations printed to two decimals.
std::string newick_rounded(const RootedTree& tree, int id) {
  const auto& node = tree.node(id);
  if (tree.is_leaf(id)) return quote_label(node.label);
  std::string s = "(";
  for (std::size_t i = 0; i < node.children.size(); ++i)
    s += (i ? "," : "") + newick_rounded(tree, node.children[i]);
  s += ")";
  if (node.annotation) s += round2(*node.annotation);
  return s;
}

struct EstimateArgs {
  std::string input, output, method = "kt_kagg";
  double tau_c = 0.075, alpha = 0.05;
  int boot = 200;
  std::uint64_t seed = 1;
  bool annotate = false;
  CLI::Option* tau_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* boot_opt = nullptr;
};

int run_estimate(const EstimateArgs& a) {
  EstimatorSpec spec;
  try {
    spec = parse_estimator(a.method);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const bool kagg = !spec.baseline && spec.rule == CollapseRule::KAGG;
  if (kagg && (a.alpha_opt->count() || a.boot_opt->count()))
    throw UsageError("--alpha/--boot apply to kb and SU_baseline methods, not " + spec.name);
  if (!kagg && a.tau_opt->count()) throw UsageError("--tau-c applies to kagg methods, not " + spec.name);
  if (a.tau_c < 0.0 || !std::isfinite(a.tau_c)) throw UsageError("--tau-c must be >= 0");
  if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) throw UsageError("--alpha must be in [0, 1]");
  if (a.boot < 1) throw UsageError("--boot must be >= 1");

  log("estimate input=" + a.input + " method=" + spec.name +
      (kagg ? " tau_c=" + format_double(a.tau_c)
            : " alpha=" + format_double(a.alpha) + " boot=" + std::to_string(a.boot)) +
      " seed=" + std::to_string(a.seed) + " annotate=" + (a.annotate ? "yes" : "no"));
  const Dataset data = read_csv(a.input);
  if (data.d() < 3) throw DataError("need at least 3 columns, found " + std::to_string(data.d()));
  const PseudoObservations u = pseudo_observations(data);

  RootedTree tree;
  if (spec.baseline) {
    tree = su_baseline_estimate(u, a.alpha, a.boot, a.seed);
  } else {
    CollapseConfig cc;
    cc.rule = spec.rule;
    cc.tau_c = a.tau_c;
    cc.alpha = a.alpha;
    cc.bootstrap_B = a.boot;
    cc.seed = a.seed;
    SearchConfig search;
    search.seed = a.seed;
    tree = collapse(build_binary(u, spec.method, search), u, cc);
  }
  std::string text;
  if (a.annotate) text = newick_rounded(annotate_mean_tau(tree, u), 0) + ";\n";
  else text = write_newick(tree) + "\n";
  spit(a.output, text);
  log("wrote " + a.output + " (" + std::to_string(tree.internal_count()) + " internal nodes)");
  return 0;
}

int run_sample(const std::string& spec_path, int n, std::uint64_t seed, const std::string& output) {
  log("sample spec=" + spec_path + " n=" + std::to_string(n) + " seed=" + std::to_string(seed));
  if (n < 1) throw UsageError("--n must be positive");
  const NacSpec spec = NacSpec::from_json(read_json(spec_path));
  const auto report = check_nesting(spec);
  for (const auto& issue : report.issues) log(to_string(report.status) + ": " + issue);
  if (report.status == NestingStatus::Fail) throw DataError("NAC spec fails the nesting check");
  Dataset data;
  try {
    data = sample(spec, n, seed);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  std::ostringstream out;
  write_csv(out, data);
  spit(output, out.str());
  log("wrote " + output);
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& shipped, const std::string& out_dir,
                 bool record_timing, int replicates, std::uint64_t seed, bool seed_given) {
  if (config_path.empty() == shipped.empty()) throw UsageError("give exactly one of --config or --paper-config");
  nlohmann::json j = config_path.empty() ? nlohmann::json{{"paper_config", shipped}} : read_json(config_path);
  if (!config_path.empty() && !j.is_object()) throw DataError("study config must be a JSON object");
  if (replicates > 0) j["replicates"] = replicates;
  if (seed_given) j["seed"] = seed;
  if (record_timing) j["record_timing"] = true;
  if (!shipped.empty()) {
    const auto all = paper_configs();
    if (!all.count(shipped)) {
      std::string names;
      for (const auto& [k, _] : all) names += " " + k;
      throw UsageError("unknown shipped config '" + shipped + "'; known:" + names);
    }
  }
  const StudyConfig config = StudyConfig::from_json(j);
  log("simulate " + config.to_json().dump());
  fs::create_directories(out_dir);
  const StudyResult result = run_study(config);
  std::ostringstream csv;
  write_results_csv(csv, result);
  spit((fs::path(out_dir) / "results.csv").string(), csv.str());
  spit((fs::path(out_dir) / "summary.json").string(), summary_json(result).dump(2) + "\n");
  spit((fs::path(out_dir) / "config.json").string(), config.to_json().dump(2) + "\n");
  log("wrote " + out_dir + "/results.csv, summary.json, config.json");
  return 0;
}

int run_distmat(const std::string& input, const std::string& kind_name, const std::string& output) {
  DependenceKind kind;
  try {
    kind = parse_dependence_kind(kind_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  log("distmat input=" + input + " kind=" + to_string(kind));
  const Dataset data = read_csv(input);
  if (kind == DependenceKind::HD && data.n() < 5) throw DataError("hD needs at least 5 rows");
  std::ostringstream out;
  write_matrix_csv(out, dependence_matrix(data, kind));
  spit(output, out.str());
  log("wrote " + output);
  return 0;
}

int run_treedist(const std::string& a, const std::string& b) {
  const RootedTree ta = load_tree(a), tb = load_tree(b);
  if (ta.sorted_labels() != tb.sorted_labels()) throw DataError("trees have different leaf sets");
  std::cout << "01=" << tree_distance_01(ta, tb) << " tri=" << tree_distance_tri(ta, tb)
            << " max=" << binomial3(ta.leaf_count()) << '\n';
  return 0;
}

int run_triples(const std::string& input) {
  const RootedTree tree = load_tree(input);
  if (tree.leaf_count() < 3) throw DataError("tree needs at least three leaves");
  for (const auto& s : decompose(tree).shapes()) std::cout << s.to_string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Estimate and simulate nested Archimedean copula tree structures"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate a tree structure from a CSV file");
  estimate->add_option("--input", est.input, "CSV with a header row")->required();
  estimate->add_option("--method", est.method, "kt_kagg, hD_kagg, kind_kagg, NJNNI_kb, RNix_kb, ..., SU_baseline")
      ->capture_default_str();
  est.tau_opt = estimate->add_option("--tau-c", est.tau_c, "kagg collapse threshold")->capture_default_str();
  est.alpha_opt = estimate->add_option("--alpha", est.alpha, "kb / SU_baseline level")->capture_default_str();
  est.boot_opt = estimate->add_option("--boot", est.boot, "bootstrap resamples")->capture_default_str();
  estimate->add_option("--seed", est.seed, "random seed")->capture_default_str();
  estimate->add_option("--output", est.output, "Newick output file")->required();
  estimate->add_flag("--annotate", est.annotate, "label internal nodes with mean Kendall tau (2 decimals)");

  std::string spec_path, sample_out;
  int sample_n = 0;
  std::uint64_t sample_seed = 1;
  auto* samp = app.add_subcommand("sample", "Draw a sample from a NAC spec");
  samp->add_option("--spec", spec_path, "NAC spec JSON")->required();
  samp->add_option("--n", sample_n, "sample size")->required();
  samp->add_option("--seed", sample_seed, "random seed")->capture_default_str();
  samp->add_option("--output", sample_out, "CSV output file")->required();

  std::string config_path, shipped_name, out_dir;
  bool record_timing = false;
  int replicates = 0;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "Run a simulation study");
  sim->add_option("--config", config_path, "study config JSON");
  sim->add_option("--paper-config", shipped_name, "shipped config: fig7_left ... fig12");
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--replicates", replicates, "override the replicate count");
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "override the master seed");
  sim->add_flag("--record-timing", record_timing, "write wall-clock times (breaks byte-identical reruns)");

  std::string dm_input, dm_kind = "kt", dm_output;
  auto* dm = app.add_subcommand("distmat", "Write a dependence distance matrix");
  dm->add_option("--input", dm_input, "CSV with a header row")->required();
  dm->add_option("--kind", dm_kind, "kt, hD or kind")->capture_default_str();
  dm->add_option("--output", dm_output, "CSV output file")->required();

  std::string tree_a, tree_b;
  auto* td = app.add_subcommand("treedist", "01- and tri-distance between two trees");
  td->add_option("--a", tree_a, "Newick file or text")->required();
  td->add_option("--b", tree_b, "Newick file or text")->required();

  std::string triples_input;
  auto* tr = app.add_subcommand("triples", "Print the trivariate decomposition of a tree");
  tr->add_option("--input", triples_input, "Newick file or text")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*estimate) return run_estimate(est);
    if (*samp) return run_sample(spec_path, sample_n, sample_seed, sample_out);
    if (*sim)
      return run_simulate(config_path, shipped_name, out_dir, record_timing, replicates, sim_seed,
                          sim_seed_opt->count() > 0);
    if (*dm) return run_distmat(dm_input, dm_kind, dm_output);
    if (*td) return run_treedist(tree_a, tree_b);
    if (*tr) return run_triples(triples_input);
  } catch (const UsageError& e) {
    log(std::string("usage error: ") + e.what());
    return 1;
  } catch (const DataError& e) {
    log(std::string("data error: ") + e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    log(std::string("data error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log(std::string("internal error: ") + e.what());
    return 3;
  }
  return 1;
}
