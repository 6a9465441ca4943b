#include "nacest/parsimony.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace nacest {

void SearchConfig::validate() const {
  if (max_rounds < 1) throw std::invalid_argument("max_rounds must be positive");
  if (ratchet_iterations < 0) throw std::invalid_argument("ratchet_iterations must be >= 0");
  if (!(ratchet_reweight_fraction > 0.0 && ratchet_reweight_fraction < 1.0))
    throw std::invalid_argument("ratchet reweight fraction must be in (0, 1)");
  if (!(ratchet_weight_factor > 1.0)) throw std::invalid_argument("ratchet weight factor must be > 1");
}

int CharacterMatrix::row(const std::string& label) const {
  auto it = std::find(rows.begin(), rows.end(), label);
  if (it == rows.end()) throw std::invalid_argument("no row for '" + label + "'");
  return static_cast<int>(it - rows.begin());
}

std::string pick_outgroup(const std::vector<std::string>& leaves) {
  std::string name = "O";
  while (std::find(leaves.begin(), leaves.end(), name) != leaves.end()) name += '_';
  return name;
}

CharacterMatrix build_character_matrix(const std::vector<RootedTree>& trees,
                                       const std::vector<std::string>& all_leaves) {
  if (trees.empty()) throw std::invalid_argument("no input trees");
  CharacterMatrix m;
  m.rows = all_leaves;
  std::sort(m.rows.begin(), m.rows.end());
  if (std::adjacent_find(m.rows.begin(), m.rows.end()) != m.rows.end())
    throw std::invalid_argument("duplicate leaf labels");
  m.outgroup = pick_outgroup(m.rows);
  m.rows.push_back(m.outgroup);
  std::unordered_map<std::string, int> index;
  for (int r = 0; r + 1 < m.row_count(); ++r) index.emplace(m.rows[r], r);

  std::vector<std::vector<std::int8_t>> columns;
  for (const auto& tree : trees) {
    std::vector<std::int8_t> present(m.rows.size(), CharacterMatrix::kUnknown);
    for (const auto& l : tree.leaf_labels()) {
      auto it = index.find(l);
      if (it == index.end()) throw std::invalid_argument("input tree leaf '" + l + "' is not in the leaf set");
      present[it->second] = 0;
    }
    present[m.rows.size() - 1] = 0;  // outgroup
    // With the outgroup hung off the root, each non-root internal node is
    // one internal edge of the unrooted tree.
    for (int v : tree.internal_nodes()) {
      if (v == tree.root()) continue;
      auto col = present;
      for (int leaf : tree.leaves_below(v)) col[index.at(tree.node(leaf).label)] = 1;
      columns.push_back(std::move(col));
    }
  }
  m.cells.resize(m.row_count(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (int r = 0; r < m.row_count(); ++r) m.cells(r, static_cast<Eigen::Index>(c)) = columns[c][r];
  return m;
}

CharacterMatrix character_matrix_from_triples(const TripleSet& triples) {
  const int d = triples.label_count();
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return triples.labels()[a] < triples.labels()[b]; });
  std::vector<int> row_of(d);
  for (int r = 0; r < d; ++r) row_of[order[r]] = r;

  CharacterMatrix m;
  for (int idx : order) m.rows.push_back(triples.labels()[idx]);
  m.outgroup = pick_outgroup(m.rows);
  m.rows.push_back(m.outgroup);

  std::vector<std::array<int, 3>> cherries;  // pair rows, outlier row
  for (int k = 2; k < d; ++k)
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < j; ++i) {
        const int out = triples.outlier(i, j, k);
        if (out < 0) continue;
        std::array<int, 3> c{};
        int slot = 0;
        for (int x : {i, j, k})
          if (x != out) c[slot++] = row_of[x];
        c[2] = row_of[out];
        cherries.push_back(c);
      }
  m.cells = CellMatrix::Constant(m.row_count(), static_cast<Eigen::Index>(cherries.size()),
                                 CharacterMatrix::kUnknown);
  for (std::size_t c = 0; c < cherries.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    m.cells(cherries[c][0], col) = 1;
    m.cells(cherries[c][1], col) = 1;
    m.cells(cherries[c][2], col) = 0;
    m.cells(d, col) = 0;
  }
  return m;
}

void write_character_matrix(std::ostream& out, const CharacterMatrix& m) {
  out << "label";
  for (int c = 0; c < m.column_count(); ++c) out << ",c" << c + 1;
  out << '\n';
  for (int r = 0; r < m.row_count(); ++r) {
    out << m.rows[r];
    for (int c = 0; c < m.column_count(); ++c) {
      const auto v = m.cells(r, c);
      out << ',' << (v == CharacterMatrix::kUnknown ? std::string("?") : std::to_string(v));
    }
    out << '\n';
  }
}

FitchScorer::FitchScorer(const CharacterMatrix& matrix, const std::vector<double>& weights)
    : rows_(matrix.rows) {
  const int cols = matrix.column_count();
  if (!weights.empty() && static_cast<int>(weights.size()) != cols)
    throw std::invalid_argument("one weight per column required");
  std::map<double, std::vector<int>> groups;
  for (int c = 0; c < cols; ++c) groups[weights.empty() ? 1.0 : weights[c]].push_back(c);

  std::vector<std::pair<std::vector<int>, Block>> layout;
  for (auto& [w, members] : groups) {
    const int n_words = (static_cast<int>(members.size()) + 63) / 64;
    layout.push_back({members, Block{words_, n_words, w}});
    words_ += n_words;
  }
  const int rows = matrix.row_count();
  // Padding bits are state 0 in every row, so they never cost anything.
  can0_.assign(static_cast<std::size_t>(rows) * words_, ~std::uint64_t{0});
  can1_.assign(static_cast<std::size_t>(rows) * words_, 0);
  for (auto& [members, block] : layout) {
    blocks_.push_back(block);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const int word = block.first_word + static_cast<int>(k / 64);
      const std::uint64_t bit = std::uint64_t{1} << (k % 64);
      for (int r = 0; r < rows; ++r) {
        const auto v = matrix.cells(r, members[k]);
        const std::size_t at = static_cast<std::size_t>(r) * words_ + word;
        if (v == 1) can0_[at] &= ~bit;
        if (v != 0) can1_[at] |= bit;
      }
    }
  }
}

double FitchScorer::score(const UnrootedTree& tree) const {
  const int leaves = tree.leaf_count();
  if (leaves != static_cast<int>(rows_.size())) throw std::invalid_argument("tree leaves do not match matrix rows");
  std::vector<int> row_of(leaves);
  if (tree.labels() == rows_) {
    std::iota(row_of.begin(), row_of.end(), 0);
  } else {
    std::unordered_map<std::string, int> index;
    for (int r = 0; r < leaves; ++r) index.emplace(rows_[r], r);
    for (int l = 0; l < leaves; ++l) {
      auto it = index.find(tree.label(l));
      if (it == index.end()) throw std::invalid_argument("tree leaf '" + tree.label(l) + "' has no matrix row");
      row_of[l] = it->second;
    }
  }
  if (words_ == 0 || leaves < 2) return 0.0;

  const std::size_t w = static_cast<std::size_t>(words_);
  std::vector<std::uint64_t> s0(static_cast<std::size_t>(tree.size()) * w);
  std::vector<std::uint64_t> s1(s0.size());
  std::vector<std::uint64_t> changes(w, 0);

  auto load_leaf = [&](int leaf) {
    const std::size_t src = static_cast<std::size_t>(row_of[leaf]) * w;
    std::copy_n(can0_.begin() + src, w, s0.begin() + leaf * w);
    std::copy_n(can1_.begin() + src, w, s1.begin() + leaf * w);
  };
  // Merge the state sets of `b` into `a`, counting forced changes.
  auto merge = [&](std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < w; ++k) {
      const std::uint64_t i0 = s0[a + k] & s0[b + k];
      const std::uint64_t i1 = s1[a + k] & s1[b + k];
      const std::uint64_t empty = ~(i0 | i1);
      changes[k] = empty;
      s0[a + k] = i0 | (empty & (s0[a + k] | s0[b + k]));
      s1[a + k] = i1 | (empty & (s1[a + k] | s1[b + k]));
    }
    double total = 0.0;
    for (const auto& blk : blocks_) {
      long c = 0;
      for (int k = blk.first_word; k < blk.first_word + blk.words; ++k) c += std::popcount(changes[k]);
      total += blk.weight * static_cast<double>(c);
    }
    return total;
  };

  // Root at leaf 0: postorder over the rest of the tree from its neighbor.
  const int top = tree.neighbors(0).front();
  std::vector<std::pair<int, int>> order;  // (node, parent) in preorder
  std::vector<std::pair<int, int>> stack{{top, 0}};
  while (!stack.empty()) {
    auto [v, p] = stack.back();
    stack.pop_back();
    order.emplace_back(v, p);
    for (int nb : tree.neighbors(v))
      if (nb != p) stack.emplace_back(nb, v);
  }
  double total = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = it->first, p = it->second;
    if (tree.is_leaf(v)) {
      load_leaf(v);
      continue;
    }
    bool first = true;
    for (int nb : tree.neighbors(v)) {
      if (nb == p) continue;
      if (first) {
        std::copy_n(s0.begin() + nb * w, w, s0.begin() + v * w);
        std::copy_n(s1.begin() + nb * w, w, s1.begin() + v * w);
        first = false;
      } else {
        total += merge(v * w, nb * w);
      }
    }
  }
  load_leaf(0);
  total += merge(0, static_cast<std::size_t>(top) * w);
  return total;
}

long fitch_score(const UnrootedTree& tree, const CharacterMatrix& matrix) {
  return static_cast<long>(FitchScorer(matrix).score(tree));
}

namespace {

struct NniMove {
  int u, a, v, b;
};

std::vector<NniMove> nni_moves(const UnrootedTree& tree) {
  if (tree.leaf_count() < 4) throw std::invalid_argument("NNI needs at least four leaves");
  if (!tree.is_binary()) throw std::invalid_argument("NNI is defined here for binary trees only");
  std::vector<NniMove> moves;
  for (auto [u, v] : tree.internal_edges()) {
    int a = -1;
    for (int nb : tree.neighbors(u))
      if (nb != v) {
        a = nb;
        break;
      }
    for (int b : tree.neighbors(v))
      if (b != u) moves.push_back({u, a, v, b});
  }
  return moves;
}

}  // namespace

std::vector<UnrootedTree> nni_neighbors(const UnrootedTree& tree) {
  std::vector<UnrootedTree> out;
  for (const auto& m : nni_moves(tree)) {
    UnrootedTree t = tree;
    t.swap_subtrees(m.u, m.a, m.v, m.b);
    out.push_back(std::move(t));
  }
  return out;
}

UnrootedTree nj_tree(const Eigen::MatrixXd& dist, const std::vector<std::string>& labels) {
  const int d = static_cast<int>(labels.size());
  if (d < 3) throw std::invalid_argument("neighbor joining needs at least three leaves");
  if (dist.rows() != d || dist.cols() != d) throw std::invalid_argument("distance matrix size mismatch");
  if (!dist.allFinite()) throw std::invalid_argument("distance matrix is not finite");
  if ((dist - dist.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("distance matrix is not symmetric");

  // Leaves keep ids 0..d-1 in the given label order; new internal nodes
  // follow.
  std::vector<std::vector<int>> adjacency(d);
  std::vector<int> node;                 // active cluster -> tree node
  std::vector<std::string> key;          // smallest label in the cluster
  for (int i = 0; i < d; ++i) {
    node.push_back(i);
    key.push_back(labels[i]);
  }
  Eigen::MatrixXd D = dist;
  auto link = [&](int a, int b) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  };

  while (static_cast<int>(node.size()) > 3) {
    const int r = static_cast<int>(node.size());
    Eigen::VectorXd row_sum = D.rowwise().sum();
    int bi = -1, bj = -1;
    double best = 0.0;
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        const double q = (r - 2) * D(i, j) - row_sum(i) - row_sum(j);
        bool take = bi < 0 || q < best - 1e-12;
        if (!take && std::abs(q - best) <= 1e-12) {
          const auto cand = std::minmax(key[i], key[j]);
          const auto cur = std::minmax(key[bi], key[bj]);
          take = cand < cur;
        }
        if (take) {
          best = q;
          bi = i;
          bj = j;
        }
      }
    const int joined = static_cast<int>(adjacency.size());
    adjacency.emplace_back();
    link(joined, node[bi]);
    link(joined, node[bj]);

    Eigen::VectorXd nd(r);
    for (int k = 0; k < r; ++k) nd(k) = 0.5 * (D(bi, k) + D(bj, k) - D(bi, bj));
    // Replace bi with the new cluster, drop bj.
    for (int k = 0; k < r; ++k) D(bi, k) = D(k, bi) = nd(k);
    D(bi, bi) = 0.0;
    node[bi] = joined;
    key[bi] = std::min(key[bi], key[bj]);
    std::vector<int> keep;
    for (int k = 0; k < r; ++k)
      if (k != bj) keep.push_back(k);
    Eigen::MatrixXd next(r - 1, r - 1);
    for (int a = 0; a < r - 1; ++a)
      for (int b = 0; b < r - 1; ++b) next(a, b) = D(keep[a], keep[b]);
    D = std::move(next);
    node.erase(node.begin() + bj);
    key.erase(key.begin() + bj);
  }
  const int centre = static_cast<int>(adjacency.size());
  adjacency.emplace_back();
  for (int id : node) link(centre, id);
  return UnrootedTree(labels, std::move(adjacency));
}

Eigen::MatrixXd hamming_distances(const CharacterMatrix& m) {
  const int rows = m.row_count();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, rows);
  for (int a = 0; a < rows; ++a)
    for (int b = a + 1; b < rows; ++b) {
      long shared = 0, differ = 0;
      for (int c = 0; c < m.column_count(); ++c) {
        const auto x = m.cells(a, c), y = m.cells(b, c);
        if (x == CharacterMatrix::kUnknown || y == CharacterMatrix::kUnknown) continue;
        ++shared;
        if (x != y) ++differ;
      }
      out(a, b) = out(b, a) = shared ? static_cast<double>(differ) / static_cast<double>(shared) : 0.5;
    }
  return out;
}

UnrootedTree random_binary_tree(const std::vector<std::string>& labels, Rng& rng) {
  const int d = static_cast<int>(labels.size());
  if (d < 3) throw std::invalid_argument("random tree needs at least three leaves");
  std::vector<std::vector<int>> adjacency(d);
  auto link = [&](int a, int b) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  };
  const int centre = d;
  adjacency.emplace_back();
  for (int i = 0; i < 3; ++i) link(centre, i);
  std::vector<std::pair<int, int>> edges{{centre, 0}, {centre, 1}, {centre, 2}};
  for (int leaf = 3; leaf < d; ++leaf) {
    const auto pick = static_cast<std::size_t>(uniform_index(rng, edges.size()));
    const auto [a, b] = edges[pick];
    const int mid = static_cast<int>(adjacency.size());
    adjacency.emplace_back();
    std::replace(adjacency[a].begin(), adjacency[a].end(), b, mid);
    std::replace(adjacency[b].begin(), adjacency[b].end(), a, mid);
    adjacency[mid] = {a, b};
    link(mid, leaf);
    edges[pick] = {a, mid};
    edges.emplace_back(mid, b);
    edges.emplace_back(mid, leaf);
  }
  return UnrootedTree(labels, std::move(adjacency));
}

double hill_climb(UnrootedTree& tree, const FitchScorer& scorer, int max_rounds) {
  double current = scorer.score(tree);
  if (tree.leaf_count() < 4) return current;
  for (int round = 0; round < max_rounds; ++round) {
    const auto moves = nni_moves(tree);
    int best = -1;
    double best_score = current;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      const auto& m = moves[i];
      tree.swap_subtrees(m.u, m.a, m.v, m.b);
      const double s = scorer.score(tree);
      tree.swap_subtrees(m.u, m.b, m.v, m.a);
      if (s < best_score) {
        best_score = s;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) break;
    const auto& m = moves[best];
    tree.swap_subtrees(m.u, m.a, m.v, m.b);
    current = best_score;
  }
  return current;
}

UnrootedTree ratchet(const UnrootedTree& start, const CharacterMatrix& matrix,
                     const SearchConfig& config, Rng& rng) {
  config.validate();
  const FitchScorer plain(matrix);
  UnrootedTree current = start;
  double current_score = hill_climb(current, plain, config.max_rounds);
  UnrootedTree best = current;
  double best_score = current_score;
  const int cols = matrix.column_count();
  if (cols == 0) return best;
  const int boosted = std::max(1, static_cast<int>(config.ratchet_reweight_fraction * cols));
  std::vector<int> columns(cols);
  for (int it = 0; it < config.ratchet_iterations; ++it) {
    std::iota(columns.begin(), columns.end(), 0);
    std::vector<double> weights(cols, 1.0);
    // Partial Fisher-Yates: the first `boosted` entries are a uniform subset.
    for (int k = 0; k < boosted; ++k) {
      const auto pick = k + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cols - k)));
      std::swap(columns[k], columns[pick]);
      weights[columns[k]] = config.ratchet_weight_factor;
    }
    hill_climb(current, FitchScorer(matrix, weights), config.max_rounds);
    current_score = hill_climb(current, plain, config.max_rounds);
    if (current_score < best_score) {
      best = current;
      best_score = current_score;
    }
  }
  return best;
}

RootedTree supertree_from_triples(const TripleSet& triples, StartTree start,
                                  const SearchConfig& config) {
  config.validate();
  if (triples.label_count() < 3) throw std::invalid_argument("supertree needs at least three leaves");
  const CharacterMatrix matrix = character_matrix_from_triples(triples);
  UnrootedTree tree;
  if (start == StartTree::NeighborJoining) {
    tree = nj_tree(hamming_distances(matrix), matrix.rows);
    hill_climb(tree, FitchScorer(matrix), config.max_rounds);
  } else {
    Rng rng(config.seed);
    tree = ratchet(random_binary_tree(matrix.rows, rng), matrix, config, rng);
  }
  return root_with_outgroup(tree, matrix.outgroup);
}

}  // namespace nacest
