#include "nacest/unrooted.hpp"

#include <algorithm>
#include <stdexcept>

namespace nacest {

namespace {

// Builds the rooted subtree reached from `id` coming from `from`, skipping
// nodes left with a single child.
int hang(const UnrootedTree& tree, int id, int from, TreeBuilder& builder) {
  if (tree.is_leaf(id)) return builder.leaf(tree.label(id));
  std::vector<int> kids;
  for (int nb : tree.neighbors(id))
    if (nb != from) kids.push_back(hang(tree, nb, id, builder));
  if (kids.size() == 1) return kids[0];
  return builder.internal(std::move(kids));
}

void replace_neighbor(std::vector<int>& adj, int old_id, int new_id) {
  auto it = std::find(adj.begin(), adj.end(), old_id);
  if (it == adj.end()) throw std::invalid_argument("nodes are not adjacent");
  *it = new_id;
}

}  // namespace

UnrootedTree::UnrootedTree(std::vector<std::string> labels, std::vector<std::vector<int>> adjacency)
    : labels_(std::move(labels)), adjacency_(std::move(adjacency)) {
  const int n = size();
  const int leaves = leaf_count();
  if (leaves == 0 || n < leaves) throw std::invalid_argument("unrooted tree needs its leaves");
  auto sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate leaf labels");

  long degree_sum = 0;
  for (int id = 0; id < n; ++id) {
    const auto& adj = adjacency_[id];
    degree_sum += static_cast<long>(adj.size());
    if (id < leaves && n > 1 && adj.size() != 1)
      throw std::invalid_argument("leaf '" + labels_[id] + "' must have exactly one neighbor");
    if (id >= leaves && adj.size() < 3)
      throw std::invalid_argument("internal node of an unrooted tree needs degree >= 3");
    for (int nb : adj) {
      if (nb < 0 || nb >= n || nb == id) throw std::invalid_argument("bad adjacency");
      const auto& back = adjacency_[nb];
      if (std::count(back.begin(), back.end(), id) != 1)
        throw std::invalid_argument("adjacency is not symmetric");
    }
  }
  if (degree_sum != 2L * (n - 1)) throw std::invalid_argument("adjacency is not a tree");
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int nb : adjacency_[v])
      if (!seen[nb]) {
        seen[nb] = true;
        ++reached;
        stack.push_back(nb);
      }
  }
  if (reached != n) throw std::invalid_argument("adjacency is not connected");
}

UnrootedTree UnrootedTree::from_rooted(const RootedTree& tree) {
  const auto& leaf_ids = tree.leaves();
  std::vector<int> id(tree.size(), -1);
  std::vector<std::string> labels;
  for (int leaf : leaf_ids) {
    id[leaf] = static_cast<int>(labels.size());
    labels.push_back(tree.node(leaf).label);
  }
  const int root = tree.root();
  const bool suppress_root = !tree.is_leaf(root) && tree.children(root).size() == 2;
  int next = static_cast<int>(labels.size());
  for (int v = 0; v < tree.size(); ++v)
    if (!tree.is_leaf(v) && !(suppress_root && v == root)) id[v] = next++;

  std::vector<std::vector<int>> adjacency(next);
  auto link = [&](int a, int b) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  };
  for (int v = 0; v < tree.size(); ++v) {
    if (v == root) continue;
    const int p = tree.parent(v);
    if (suppress_root && p == root) continue;
    link(id[v], id[p]);
  }
  if (suppress_root) link(id[tree.children(root)[0]], id[tree.children(root)[1]]);
  return UnrootedTree(std::move(labels), std::move(adjacency));
}

int UnrootedTree::find_leaf(std::string_view label) const {
  for (int i = 0; i < leaf_count(); ++i)
    if (labels_[i] == label) return i;
  throw std::invalid_argument("unknown leaf label '" + std::string(label) + "'");
}

bool UnrootedTree::is_binary() const {
  for (int id = leaf_count(); id < size(); ++id)
    if (adjacency_[id].size() != 3) return false;
  return true;
}

std::vector<std::pair<int, int>> UnrootedTree::internal_edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = leaf_count(); u < size(); ++u)
    for (int v : adjacency_[u])
      if (v > u) out.emplace_back(u, v);
  return out;
}

void UnrootedTree::swap_subtrees(int u, int a, int v, int b) {
  if (a == v || b == u) throw std::invalid_argument("swap would detach the central edge");
  replace_neighbor(adjacency_[u], a, b);
  replace_neighbor(adjacency_[a], u, v);
  replace_neighbor(adjacency_[v], b, a);
  replace_neighbor(adjacency_[b], v, u);
}

RootedTree UnrootedTree::rooted_at(int id) const {
  TreeBuilder builder;
  return builder.build(hang(*this, id, -1, builder));
}

std::string UnrootedTree::canonical() const {
  const auto first = std::min_element(labels_.begin(), labels_.end());
  const std::string& anchor = *first;
  if (leaf_count() == 1) return anchor + ";";
  return anchor + "|" + root_with_outgroup(*this, anchor).canonical();
}

UnrootedTree attach_outgroup(const RootedTree& tree, const std::string& outgroup) {
  if (tree.has_leaf(outgroup)) throw std::invalid_argument("outgroup label already used");
  auto nodes = tree.nodes();
  RootedTree::Node leaf;
  leaf.label = outgroup;
  nodes.push_back(leaf);
  const int out_id = static_cast<int>(nodes.size()) - 1;
  int root = tree.root();
  if (tree.is_leaf(root)) {
    RootedTree::Node top;
    top.children = {root, out_id};
    nodes.push_back(top);
    root = static_cast<int>(nodes.size()) - 1;
  } else {
    nodes[root].children.push_back(out_id);
  }
  return UnrootedTree::from_rooted(RootedTree(std::move(nodes), root));
}

RootedTree root_with_outgroup(const UnrootedTree& tree, std::string_view outgroup) {
  const int out = tree.find_leaf(outgroup);
  if (tree.leaf_count() < 2) throw std::invalid_argument("tree has only the outgroup");
  const int anchor = tree.neighbors(out).front();
  TreeBuilder builder;
  return builder.build(hang(tree, anchor, out, builder));
}

}  // namespace nacest
