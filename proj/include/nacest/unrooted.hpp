#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nacest/tree.hpp"

namespace nacest {

// Unrooted tree as an adjacency structure. Nodes 0..leaf_count()-1 are the
// leaves, in label order; internal nodes follow and have degree >= 3.
class UnrootedTree {
 public:
  UnrootedTree() = default;
  UnrootedTree(std::vector<std::string> labels, std::vector<std::vector<int>> adjacency);

  // Drops the root; a root with two children is suppressed by joining its
  // two edges.
  static UnrootedTree from_rooted(const RootedTree& tree);

  int leaf_count() const { return static_cast<int>(labels_.size()); }
  int size() const { return static_cast<int>(adjacency_.size()); }
  bool is_leaf(int id) const { return id < leaf_count(); }
  const std::string& label(int leaf) const { return labels_.at(leaf); }
  const std::vector<std::string>& labels() const { return labels_; }
  int find_leaf(std::string_view label) const;
  const std::vector<int>& neighbors(int id) const { return adjacency_[id]; }

  bool is_binary() const;

  // Edges (u, v) with u < v whose endpoints are both internal.
  std::vector<std::pair<int, int>> internal_edges() const;

  // Exchanges the subtree hanging from `u` through neighbor `a` with the
  // subtree hanging from `v` through neighbor `b`, where (u, v) is an edge.
  // swap_subtrees(u, b, v, a) undoes it.
  void swap_subtrees(int u, int a, int v, int b);

  // Rooted view hanging from internal node `id` (no suppression).
  RootedTree rooted_at(int id) const;

  // Topology key equal for two trees iff they are the same unrooted topology.
  std::string canonical() const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> adjacency_;
};

// Adds `outgroup` as an extra child of the root and unroots.
UnrootedTree attach_outgroup(const RootedTree& tree, const std::string& outgroup);

// Roots on the edge leading to `outgroup`, then removes the outgroup leaf and
// suppresses any node left with a single child.
RootedTree root_with_outgroup(const UnrootedTree& tree, std::string_view outgroup);

}  // namespace nacest
