#include "nacest/tree.hpp"

#include <algorithm>
#include <stdexcept>

#include "nacest/newick.hpp"

namespace nacest {

RootedTree::RootedTree(std::vector<Node> nodes, int root) {
  const int count = static_cast<int>(nodes.size());
  if (root < 0 || root >= count) throw std::invalid_argument("tree root out of range");

  std::vector<int> new_id(count, -1);
  std::vector<int> order;
  std::vector<int> stack{root};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (new_id[id] != -1) throw std::invalid_argument("tree contains a cycle or shared node");
    new_id[id] = static_cast<int>(order.size());
    order.push_back(id);
    const auto& kids = nodes[id].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      if (*it < 0 || *it >= count) throw std::invalid_argument("child id out of range");
      stack.push_back(*it);
    }
  }

  nodes_.resize(order.size());
  depth_.assign(order.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    Node src = std::move(nodes[order[i]]);
    Node& dst = nodes_[i];
    dst.label = std::move(src.label);
    dst.annotation = src.annotation;
    dst.children.reserve(src.children.size());
    for (int c : src.children) dst.children.push_back(new_id[c]);
  }
  for (int id = 0; id < size(); ++id) {
    Node& n = nodes_[id];
    if (n.children.size() == 1)
      throw std::invalid_argument("internal node with fewer than two children");
    for (int c : n.children) {
      nodes_[c].parent = id;
      depth_[c] = depth_[id] + 1;
    }
    if (n.children.empty()) {
      if (n.label.empty()) throw std::invalid_argument("leaf without a label");
      n.annotation.reset();
      if (!leaf_index_.emplace(n.label, id).second)
        throw std::invalid_argument("duplicate leaf label '" + n.label + "'");
      leaf_ids_.push_back(id);
    } else {
      n.label.clear();
    }
  }
}

std::vector<int> RootedTree::internal_nodes() const {
  std::vector<int> out;
  for (int id = 0; id < size(); ++id)
    if (!is_leaf(id)) out.push_back(id);
  return out;
}

std::vector<std::string> RootedTree::leaf_labels() const {
  std::vector<std::string> out;
  out.reserve(leaf_ids_.size());
  for (int id : leaf_ids_) out.push_back(nodes_[id].label);
  return out;
}

std::vector<std::string> RootedTree::sorted_labels() const {
  auto out = leaf_labels();
  std::sort(out.begin(), out.end());
  return out;
}

bool RootedTree::has_leaf(std::string_view label) const {
  return leaf_index_.count(std::string(label)) > 0;
}

int RootedTree::find_leaf(std::string_view label) const {
  auto it = leaf_index_.find(std::string(label));
  if (it == leaf_index_.end())
    throw std::invalid_argument("unknown leaf label '" + std::string(label) + "'");
  return it->second;
}

int RootedTree::lca(int a, int b) const {
  while (depth_[a] > depth_[b]) a = nodes_[a].parent;
  while (depth_[b] > depth_[a]) b = nodes_[b].parent;
  while (a != b) {
    a = nodes_[a].parent;
    b = nodes_[b].parent;
  }
  return a;
}

std::vector<int> RootedTree::leaves_below(int id) const {
  std::vector<int> out;
  std::vector<int> stack{id};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (is_leaf(v)) {
      out.push_back(v);
      continue;
    }
    const auto& kids = nodes_[v].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<std::string> RootedTree::clade(int id) const {
  std::vector<std::string> out;
  for (int leaf : leaves_below(id)) out.push_back(nodes_[leaf].label);
  std::sort(out.begin(), out.end());
  return out;
}

RootedTree RootedTree::with_annotations(const std::unordered_map<int, double>& values) const {
  auto copy = nodes_;
  for (const auto& [id, value] : values) {
    if (id < 0 || id >= size() || is_leaf(id))
      throw std::invalid_argument("annotations apply to internal nodes only");
    copy[id].annotation = value;
  }
  return RootedTree(std::move(copy), 0);
}

RootedTree RootedTree::without_annotations() const {
  auto copy = nodes_;
  for (auto& n : copy) n.annotation.reset();
  return RootedTree(std::move(copy), 0);
}

namespace {

std::string canonical_from(const RootedTree& tree, int id) {
  if (tree.is_leaf(id)) return quote_label(tree.node(id).label);
  std::vector<std::string> parts;
  for (int c : tree.children(id)) parts.push_back(canonical_from(tree, c));
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  out += ')';
  return out;
}

}  // namespace

std::string RootedTree::canonical() const {
  if (empty()) return ";";
  return canonical_from(*this, 0) + ';';
}

int TreeBuilder::leaf(std::string label) {
  RootedTree::Node n;
  n.label = std::move(label);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int TreeBuilder::internal(std::vector<int> children, std::optional<double> annotation) {
  RootedTree::Node n;
  n.children = std::move(children);
  n.annotation = annotation;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

RootedTree TreeBuilder::build(int root) const { return RootedTree(nodes_, root); }

bool isomorphic(const RootedTree& a, const RootedTree& b) {
  if (a.leaf_count() != b.leaf_count()) return false;
  return a.canonical() == b.canonical();
}

RootedTree make_fan(const std::vector<std::string>& labels) {
  if (labels.empty()) throw std::invalid_argument("fan needs at least one label");
  TreeBuilder builder;
  if (labels.size() == 1) return builder.build(builder.leaf(labels[0]));
  std::vector<int> kids;
  for (const auto& l : labels) kids.push_back(builder.leaf(l));
  return builder.build(builder.internal(std::move(kids)));
}

RootedTree collapse_edge(const RootedTree& tree, int child) {
  if (child < 0 || child >= tree.size()) throw std::invalid_argument("node id out of range");
  if (child == tree.root()) throw std::invalid_argument("cannot collapse the root");
  if (tree.is_leaf(child)) throw std::invalid_argument("cannot collapse a leaf edge");

  auto nodes = tree.nodes();
  auto& siblings = nodes[tree.parent(child)].children;
  auto pos = std::find(siblings.begin(), siblings.end(), child);
  const auto grandchildren = nodes[child].children;
  pos = siblings.erase(pos);
  siblings.insert(pos, grandchildren.begin(), grandchildren.end());
  nodes[child].children.clear();
  return RootedTree(std::move(nodes), tree.root());
}

}  // namespace nacest
