#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nacest {

// Rooted phylogenetic tree over labeled leaves. Every internal node has at
// least two children and leaf labels are unique. Values are immutable once
// constructed; edits return new trees.
class RootedTree {
 public:
  struct Node {
    int parent = -1;
    std::vector<int> children;
    std::string label;                 // leaves only
    std::optional<double> annotation;  // internal nodes only
  };

  RootedTree() = default;

  // Validates the invariants and renumbers nodes in preorder from `root`.
  // Nodes not reachable from the root are dropped. Parent links in `nodes`
  // are ignored and rebuilt from the child lists.
  RootedTree(std::vector<Node> nodes, int root);

  bool empty() const { return nodes_.empty(); }
  int root() const { return 0; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }

  bool is_leaf(int id) const { return nodes_[id].children.empty(); }
  int parent(int id) const { return nodes_[id].parent; }
  const std::vector<int>& children(int id) const { return nodes_[id].children; }
  int depth(int id) const { return depth_[id]; }

  int leaf_count() const { return static_cast<int>(leaf_ids_.size()); }
  int internal_count() const { return size() - leaf_count(); }

  // Leaf node ids in preorder.
  const std::vector<int>& leaves() const { return leaf_ids_; }
  std::vector<int> internal_nodes() const;

  // Leaf labels in preorder (Newick order).
  std::vector<std::string> leaf_labels() const;
  // Leaf labels sorted lexicographically.
  std::vector<std::string> sorted_labels() const;

  bool has_leaf(std::string_view label) const;
  // Throws std::invalid_argument for unknown labels.
  int find_leaf(std::string_view label) const;

  int lca(int a, int b) const;
  std::vector<int> leaves_below(int id) const;
  // Sorted labels of the leaves below `id`.
  std::vector<std::string> clade(int id) const;

  RootedTree with_annotations(const std::unordered_map<int, double>& values) const;
  RootedTree without_annotations() const;

  // Newick string with children ordered canonically; equal for two trees iff
  // they are isomorphic as labeled rooted topologies.
  std::string canonical() const;

 private:
  std::vector<Node> nodes_;
  std::vector<int> depth_;
  std::vector<int> leaf_ids_;
  std::unordered_map<std::string, int> leaf_index_;
};

// Incremental construction helper. Ids returned by leaf()/internal() are only
// meaningful for the builder that produced them.
class TreeBuilder {
 public:
  int leaf(std::string label);
  int internal(std::vector<int> children, std::optional<double> annotation = {});
  RootedTree build(int root) const;

 private:
  std::vector<RootedTree::Node> nodes_;
};

bool isomorphic(const RootedTree& a, const RootedTree& b);

// d-fan over the given labels (a single leaf when only one label is given).
RootedTree make_fan(const std::vector<std::string>& labels);

// Removes internal non-root node `child`, re-attaching its children to its
// parent in its place.
RootedTree collapse_edge(const RootedTree& tree, int child);

}  // namespace nacest
