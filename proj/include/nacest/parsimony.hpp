#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nacest/random.hpp"
#include "nacest/tree.hpp"
#include "nacest/triples.hpp"
#include "nacest/unrooted.hpp"

namespace nacest {

struct SearchConfig {
  int max_rounds = 1000;
  int ratchet_iterations = 50;
  double ratchet_reweight_fraction = 0.25;
  double ratchet_weight_factor = 2.0;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

using CellMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Rows are the leaves followed by the outgroup; one column per clade of an
// input tree. 0 = outgroup side, 1 = clade, kUnknown = leaf absent.
struct CharacterMatrix {
  static constexpr std::int8_t kUnknown = -1;

  std::vector<std::string> rows;
  std::string outgroup;
  CellMatrix cells;

  int row_count() const { return static_cast<int>(rows.size()); }
  int column_count() const { return static_cast<int>(cells.cols()); }
  int row(const std::string& label) const;
};

// An outgroup name not clashing with any leaf: "O", else "O_", "O__", ...
std::string pick_outgroup(const std::vector<std::string>& leaves);

CharacterMatrix build_character_matrix(const std::vector<RootedTree>& trees,
                                       const std::vector<std::string>& all_leaves);

// Same matrix read directly from a triple set: one column per cherry.
CharacterMatrix character_matrix_from_triples(const TripleSet& triples);

// "?" for unknown cells.
void write_character_matrix(std::ostream& out, const CharacterMatrix& m);

// Fitch parsimony over bit-packed columns. Columns with equal weight share a
// block of 64-bit words; weights default to 1.
class FitchScorer {
 public:
  explicit FitchScorer(const CharacterMatrix& matrix, const std::vector<double>& weights = {});

  double score(const UnrootedTree& tree) const;
  const std::vector<std::string>& rows() const { return rows_; }

 private:
  struct Block {
    int first_word;
    int words;
    double weight;
  };
  std::vector<std::string> rows_;
  int words_ = 0;
  std::vector<Block> blocks_;
  // row-major: row r owns words [r * words_, (r + 1) * words_)
  std::vector<std::uint64_t> can0_;
  std::vector<std::uint64_t> can1_;
};

long fitch_score(const UnrootedTree& tree, const CharacterMatrix& matrix);

// For each internal edge the two alternative exchanges. Binary trees only.
std::vector<UnrootedTree> nni_neighbors(const UnrootedTree& tree);

// Saitou-Nei neighbor joining; equal Q values break toward the
// lexicographically smallest pair of cluster labels.
UnrootedTree nj_tree(const Eigen::MatrixXd& dist, const std::vector<std::string>& labels);

// Row-wise Hamming distance over the columns where both rows are known,
// divided by that count (0.5 when no column is shared).
Eigen::MatrixXd hamming_distances(const CharacterMatrix& m);

// Uniform binary topology by inserting leaves one at a time on a uniformly
// chosen edge.
UnrootedTree random_binary_tree(const std::vector<std::string>& labels, Rng& rng);

// Best-improvement NNI descent. Returns the final score.
double hill_climb(UnrootedTree& tree, const FitchScorer& scorer, int max_rounds);

// Parsimony ratchet from `start`; returns the best tree seen.
UnrootedTree ratchet(const UnrootedTree& start, const CharacterMatrix& matrix,
                     const SearchConfig& config, Rng& rng);

enum class StartTree { NeighborJoining, Random };

// Matrix representation with parsimony over the triples' cherries, rooted
// with the outgroup. NJ start uses plain descent; random start uses the
// ratchet.
RootedTree supertree_from_triples(const TripleSet& triples, StartTree start,
                                  const SearchConfig& config);

}  // namespace nacest
