#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nacest/dependence.hpp"
#include "nacest/generators.hpp"
#include "nacest/random.hpp"
#include "nacest/tree.hpp"

namespace nacest {

// Tree plus one generator per internal node (keyed by node id).
struct NacSpec {
  RootedTree tree;
  std::map<int, GeneratorSpec> generators;

  // Internal-node annotations of the Newick text are the taus.
  static NacSpec from_annotated_newick(const std::string& newick, Family family);
  // {"newick": ..., "family": ..., "generators": [{"node_path": [..], "family": .., "tau": ..}]}.
  // Either annotated taus plus "family", or an explicit generator list, or
  // both (the list wins). Throws DataError.
  static NacSpec from_json(const nlohmann::json& value);
  nlohmann::json to_json() const;

  const GeneratorSpec& generator(int node) const;
  std::vector<std::string> labels() const { return tree.leaf_labels(); }
  // Tree with each internal node annotated by its tau.
  RootedTree annotated_tree() const;
  // Throws std::invalid_argument when an internal node lacks a generator.
  void validate() const;
};

// Child indices from the root down to `node`.
std::vector<int> node_path(const RootedTree& tree, int node);
int node_at_path(const RootedTree& tree, const std::vector<int>& path);

enum class NestingStatus { Ok, Warn, Fail };

struct NestingReport {
  NestingStatus status = NestingStatus::Ok;
  std::vector<std::string> issues;
  // Smallest child tau minus parent tau over parent-child internal pairs.
  double min_tau_gap = 0.0;
};

NestingReport check_nesting(const NacSpec& spec);
std::string to_string(NestingStatus status);

// Frailty building blocks.
double sample_stable(double alpha, Rng& rng);          // LST exp(-t^alpha)
std::uint64_t sample_sibuya(double alpha, Rng& rng);   // P(X = 1) = alpha
std::uint64_t sample_log_series(double theta, Rng& rng);  // p = 1 - exp(-theta)
double sample_root_frailty(const GeneratorSpec& g, Rng& rng);
// Frailty of a child node given its parent's frailty; both generators share a
// family, or the parent is the independence generator.
double sample_inner_frailty(const GeneratorSpec& parent, const GeneratorSpec& child, double v_parent,
                            Rng& rng);

// n rows, one column per leaf in Newick order. Throws std::invalid_argument
// for specs the sampler cannot handle.
Dataset sample(const NacSpec& spec, int n, std::uint64_t seed);

}  // namespace nacest
