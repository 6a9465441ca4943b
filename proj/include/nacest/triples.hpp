#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nacest/tree.hpp"

namespace nacest {

// Topology of a tree restricted to three leaves: either a 3-fan or a cherry
// on two of them with the third as outlier.
struct TripleShape {
  enum class Kind { Fan, Cherry };

  std::array<std::string, 3> leaves;  // sorted
  Kind kind = Kind::Fan;
  std::array<std::string, 2> pair;    // sorted; meaningful for Cherry only

  static TripleShape fan(std::string a, std::string b, std::string c);
  static TripleShape cherry(std::string a, std::string b, std::string outlier);

  bool is_fan() const { return kind == Kind::Fan; }
  std::string outlier() const;

  // "U2,U3|U1 CHERRY" or "U1,U2,U3 FAN".
  std::string to_string() const;

  friend bool operator==(const TripleShape&, const TripleShape&) = default;
};

// One shape per 3-subset of an ordered label set. Shapes are stored by the
// colexicographic rank of the index triple i < j < k, encoded as the position
// (0, 1, 2) of the outlier within the triple or kFan.
class TripleSet {
 public:
  static constexpr std::int8_t kUnset = -2;
  static constexpr std::int8_t kFan = -1;

  TripleSet() = default;
  explicit TripleSet(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  int label_count() const { return static_cast<int>(labels_.size()); }
  std::size_t size() const { return codes_.size(); }
  int index_of(const std::string& label) const;

  static std::size_t rank(int i, int j, int k);

  // Index-based access; i, j, k distinct in any order. The code is relative to
  // the sorted order of the three indices.
  std::int8_t code(int i, int j, int k) const;
  void set_code(int i, int j, int k, std::int8_t code);

  // Outlier index, or -1 for a fan. Throws if unset.
  int outlier(int i, int j, int k) const;
  void set_cherry(int a, int b, int outlier);
  void set_fan(int i, int j, int k);

  bool complete() const;

  TripleShape shape(const std::string& a, const std::string& b, const std::string& c) const;
  void set_shape(const TripleShape& shape);

  // All entries in colexicographic rank order.
  std::vector<TripleShape> shapes() const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::int8_t> codes_;
};

TripleShape triple_shape(const RootedTree& tree, const std::string& a, const std::string& b,
                         const std::string& c);

// Decomposition over the tree's sorted labels, or over an explicit label order
// covering exactly the tree's leaves.
TripleSet decompose(const RootedTree& tree);
TripleSet decompose(const RootedTree& tree, const std::vector<std::string>& labels);

// Rebuilds a rooted tree from a complete triple set. Exact on the triple sets
// produced by decompose(); estimated (possibly contradictory) sets are
// resolved by pair support, see triples.cpp.
RootedTree reconstruct(const TripleSet& triples);

// 0 iff isomorphic, else 1.
int tree_distance_01(const RootedTree& a, const RootedTree& b);

// Number of leaf triples with different shapes; requires equal leaf sets.
long tree_distance_tri(const RootedTree& a, const RootedTree& b);

long binomial3(long d);

}  // namespace nacest
