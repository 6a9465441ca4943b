#include "nacest/triples.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace nacest {

namespace {

std::array<std::string, 3> sorted3(std::string a, std::string b, std::string c) {
  std::array<std::string, 3> out{std::move(a), std::move(b), std::move(c)};
  std::sort(out.begin(), out.end());
  return out;
}

void sort3(int& a, int& b, int& c) {
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
}

struct DisjointSets {
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> parent;
};

// Groups `members` (indices into the label set) into connected components of
// the graph whose edges have support above `floor`. Components are ordered by
// their smallest member.
std::vector<std::vector<int>> components(const std::vector<int>& members,
                                         const std::vector<std::vector<int>>& support,
                                         int floor) {
  const int m = static_cast<int>(members.size());
  DisjointSets sets(m);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      if (support[a][b] > floor) sets.unite(a, b);
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(m, -1);
  for (int a = 0; a < m; ++a) {
    const int r = sets.find(a);
    if (slot[r] == -1) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(members[a]);
  }
  return groups;
}

int build_group(const TripleSet& triples, const std::vector<int>& members, TreeBuilder& builder) {
  const int m = static_cast<int>(members.size());
  const auto& labels = triples.labels();
  if (m == 1) return builder.leaf(labels[members[0]]);
  if (m == 2)
    return builder.internal({builder.leaf(labels[members[0]]), builder.leaf(labels[members[1]])});

  // support[a][b]: number of third leaves c in the group for which the triple
  // shows a cherry on (a, b).
  std::vector<std::vector<int>> support(m, std::vector<int>(m, 0));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = b + 1; c < m; ++c) {
        const int out = triples.outlier(members[a], members[b], members[c]);
        if (out == members[c]) ++support[a][b];
        else if (out == members[b]) ++support[a][c];
        else if (out == members[a]) ++support[b][c];
      }

  auto groups = components(members, support, 0);
  if (groups.size() == 1) {
    // Contradictory input joined everything; drop the weakest edges until the
    // group splits.
    std::vector<int> levels;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b)
        if (support[a][b] > 0) levels.push_back(support[a][b]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (int floor : levels) {
      groups = components(members, support, floor);
      if (groups.size() > 1) break;
    }
  }

  std::vector<int> kids;
  for (const auto& g : groups) kids.push_back(build_group(triples, g, builder));
  return builder.internal(std::move(kids));
}

}  // namespace

TripleShape TripleShape::fan(std::string a, std::string b, std::string c) {
  TripleShape s;
  s.leaves = sorted3(std::move(a), std::move(b), std::move(c));
  s.kind = Kind::Fan;
  return s;
}

TripleShape TripleShape::cherry(std::string a, std::string b, std::string outlier) {
  TripleShape s;
  s.leaves = sorted3(a, b, outlier);
  s.kind = Kind::Cherry;
  if (b < a) std::swap(a, b);
  s.pair = {std::move(a), std::move(b)};
  return s;
}

std::string TripleShape::outlier() const {
  if (is_fan()) return {};
  for (const auto& l : leaves)
    if (l != pair[0] && l != pair[1]) return l;
  return {};
}

std::string TripleShape::to_string() const {
  if (is_fan()) return leaves[0] + "," + leaves[1] + "," + leaves[2] + " FAN";
  return pair[0] + "," + pair[1] + "|" + outlier() + " CHERRY";
}

TripleSet::TripleSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  auto sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate labels in triple set");
  codes_.assign(static_cast<std::size_t>(binomial3(label_count())), kUnset);
}

int TripleSet::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::invalid_argument("unknown label '" + label + "'");
  return static_cast<int>(it - labels_.begin());
}

std::size_t TripleSet::rank(int i, int j, int k) {
  sort3(i, j, k);
  const auto c3 = static_cast<std::size_t>(k) * (k - 1) * (k - 2) / 6;
  const auto c2 = static_cast<std::size_t>(j) * (j - 1) / 2;
  return c3 + c2 + static_cast<std::size_t>(i);
}

std::int8_t TripleSet::code(int i, int j, int k) const { return codes_.at(rank(i, j, k)); }

void TripleSet::set_code(int i, int j, int k, std::int8_t code) {
  if (i == j || j == k || i == k) throw std::invalid_argument("triple indices must be distinct");
  codes_.at(rank(i, j, k)) = code;
}

int TripleSet::outlier(int i, int j, int k) const {
  const std::int8_t c = code(i, j, k);
  if (c == kUnset) throw std::invalid_argument("triple set entry is unset");
  if (c == kFan) return -1;
  sort3(i, j, k);
  return c == 0 ? i : (c == 1 ? j : k);
}

void TripleSet::set_cherry(int a, int b, int outlier) {
  int i = a, j = b, k = outlier;
  sort3(i, j, k);
  set_code(a, b, outlier, static_cast<std::int8_t>(outlier == i ? 0 : (outlier == j ? 1 : 2)));
}

void TripleSet::set_fan(int i, int j, int k) { set_code(i, j, k, kFan); }

bool TripleSet::complete() const {
  return std::none_of(codes_.begin(), codes_.end(), [](std::int8_t c) { return c == kUnset; });
}

TripleShape TripleSet::shape(const std::string& a, const std::string& b,
                             const std::string& c) const {
  const int i = index_of(a), j = index_of(b), k = index_of(c);
  const int out = outlier(i, j, k);
  if (out < 0) return TripleShape::fan(a, b, c);
  std::vector<std::string> pair;
  for (int x : {i, j, k})
    if (x != out) pair.push_back(labels_[x]);
  return TripleShape::cherry(pair[0], pair[1], labels_[out]);
}

void TripleSet::set_shape(const TripleShape& s) {
  const int i = index_of(s.leaves[0]), j = index_of(s.leaves[1]), k = index_of(s.leaves[2]);
  if (s.is_fan()) {
    set_fan(i, j, k);
  } else {
    set_cherry(index_of(s.pair[0]), index_of(s.pair[1]), index_of(s.outlier()));
  }
}

std::vector<TripleShape> TripleSet::shapes() const {
  std::vector<TripleShape> out;
  out.reserve(size());
  const int d = label_count();
  for (int k = 2; k < d; ++k)
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < j; ++i) out.push_back(shape(labels_[i], labels_[j], labels_[k]));
  return out;
}

TripleShape triple_shape(const RootedTree& tree, const std::string& a, const std::string& b,
                         const std::string& c) {
  if (a == b || b == c || a == c) throw std::invalid_argument("triple labels must be distinct");
  const int la = tree.find_leaf(a), lb = tree.find_leaf(b), lc = tree.find_leaf(c);
  const int dab = tree.depth(tree.lca(la, lb));
  const int dac = tree.depth(tree.lca(la, lc));
  const int dbc = tree.depth(tree.lca(lb, lc));
  if (dab == dac && dac == dbc) return TripleShape::fan(a, b, c);
  if (dab > dac) return TripleShape::cherry(a, b, c);
  if (dac > dab) return TripleShape::cherry(a, c, b);
  return TripleShape::cherry(b, c, a);
}

TripleSet decompose(const RootedTree& tree) { return decompose(tree, tree.sorted_labels()); }

TripleSet decompose(const RootedTree& tree, const std::vector<std::string>& labels) {
  const int d = static_cast<int>(labels.size());
  if (d < 3) throw std::invalid_argument("decomposition needs at least three leaves");
  if (d != tree.leaf_count()) throw std::invalid_argument("label set does not match tree leaves");
  std::vector<int> leaf(d);
  for (int i = 0; i < d; ++i) leaf[i] = tree.find_leaf(labels[i]);

  std::vector<std::vector<int>> lca_depth(d, std::vector<int>(d, 0));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      lca_depth[i][j] = lca_depth[j][i] = tree.depth(tree.lca(leaf[i], leaf[j]));

  TripleSet out(labels);
  for (int k = 2; k < d; ++k)
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < j; ++i) {
        const int dij = lca_depth[i][j], dik = lca_depth[i][k], djk = lca_depth[j][k];
        if (dij == dik && dik == djk) out.set_code(i, j, k, TripleSet::kFan);
        else if (dij > dik) out.set_code(i, j, k, 2);
        else if (dik > dij) out.set_code(i, j, k, 1);
        else out.set_code(i, j, k, 0);
      }
  return out;
}

RootedTree reconstruct(const TripleSet& triples) {
  if (triples.label_count() < 3) throw std::invalid_argument("reconstruction needs at least three leaves");
  if (!triples.complete()) throw std::invalid_argument("triple set is incomplete");
  std::vector<int> all(triples.label_count());
  std::iota(all.begin(), all.end(), 0);
  TreeBuilder builder;
  const int root = build_group(triples, all, builder);
  return builder.build(root);
}

int tree_distance_01(const RootedTree& a, const RootedTree& b) { return isomorphic(a, b) ? 0 : 1; }

long tree_distance_tri(const RootedTree& a, const RootedTree& b) {
  const auto labels = a.sorted_labels();
  if (labels != b.sorted_labels()) throw std::invalid_argument("trees have different leaf sets");
  if (labels.size() < 3) return 0;
  const TripleSet ta = decompose(a, labels);
  const TripleSet tb = decompose(b, labels);
  long diff = 0;
  const int d = static_cast<int>(labels.size());
  for (int k = 2; k < d; ++k)
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < j; ++i)
        if (ta.code(i, j, k) != tb.code(i, j, k)) ++diff;
  return diff;
}

long binomial3(long d) { return d < 3 ? 0 : d * (d - 1) * (d - 2) / 6; }

}  // namespace nacest
