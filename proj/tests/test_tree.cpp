#include <doctest.h>

#include <set>

#include "nacest/errors.hpp"
#include "nacest/newick.hpp"
#include "nacest/triples.hpp"
#include "nacest/unrooted.hpp"
#include "oracles.hpp"

using namespace nacest;

namespace {

RootedTree nwk(const std::string& s) { return parse_newick(s); }

}  // namespace

TEST_CASE("newick parsing") {
  const auto t = nwk("((U2,U3),U1);");
  CHECK(t.leaf_count() == 3);
  CHECK(t.internal_count() == 2);
  CHECK(isomorphic(t, nwk("(U1,(U3,U2));")));

  const auto fan = nwk("(U1,U2,U3);");
  CHECK(fan.internal_count() == 1);
  CHECK(fan.children(fan.root()).size() == 3);

  CHECK_THROWS_AS(nwk("(A);"), DataError);
  CHECK_THROWS_AS(nwk("((A,B),A);"), DataError);
  CHECK_THROWS_AS(nwk("((A,B),C"), DataError);
  CHECK_THROWS_AS(nwk("(A,,B);"), DataError);
  CHECK_THROWS_AS(nwk(""), DataError);

  SUBCASE("lengths, comments and quoted labels") {
    const auto u = nwk("[header]((A:0.1,'B c':2)0.7:1,C);");
    CHECK(u.has_leaf("B c"));
    const int ab = u.lca(u.find_leaf("A"), u.find_leaf("B c"));
    REQUIRE(u.node(ab).annotation.has_value());
    CHECK(*u.node(ab).annotation == doctest::Approx(0.7));
    CHECK(isomorphic(u, nwk("(('B c',A),C);")));
  }
}

TEST_CASE("newick writing") {
  CHECK(write_newick(nwk("((U2,U3),U1);")) == "((U2,U3),U1);");
  CHECK(write_newick(nwk("A;")) == "A;");
  const auto annotated = nwk("((U2,U3)0.51,U1)0.33;");
  CHECK(write_newick(annotated, true) == "((U2,U3)0.51,U1)0.33;");
  CHECK(write_newick(annotated, false) == "((U2,U3),U1);");
  CHECK(write_newick(nwk("('a b',c,d);")) == "('a b',c,d);");

  Rng rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const auto t = oracle::random_tree(oracle::labels(2 + rep % 12), rng);
    CHECK(isomorphic(parse_newick(write_newick(t)), t));
  }
}

TEST_CASE("json tree round trip") {
  const auto t = nwk("((U2,U3)0.5,U1)0.25;");
  const auto back = tree_from_json(tree_to_json(t));
  CHECK(write_newick(back, true) == write_newick(t, true));
  CHECK_THROWS_AS(tree_from_json(nlohmann::json::parse(R"({"children":[{"label":"A"}]})")), DataError);
}

TEST_CASE("isomorphism ignores child order only") {
  CHECK(tree_distance_01(nwk("((1,2),(3,4));"), nwk("((4,3),(2,1));")) == 0);
  CHECK(tree_distance_01(nwk("((1,2),(3,4));"), nwk("(1,2,(3,4));")) == 1);
  CHECK(tree_distance_01(nwk("((1,2),3);"), nwk("((1,3),2);")) == 1);
}

TEST_CASE("triple shapes") {
  const auto fig1_left = nwk("((U2,U3),U1);");
  const auto s = triple_shape(fig1_left, "U1", "U2", "U3");
  CHECK(s == TripleShape::cherry("U2", "U3", "U1"));
  CHECK(s.to_string() == "U2,U3|U1 CHERRY");
  CHECK(triple_shape(nwk("(U1,U2,U3);"), "U1", "U2", "U3").is_fan());

  const auto fig4_left = nwk("(U1,(U2,(U3,U4)));");
  const auto fig4_right = nwk("(U1,(U2,U3,U4));");
  CHECK(triple_shape(fig4_left, "U2", "U3", "U4") == TripleShape::cherry("U3", "U4", "U2"));
  CHECK(triple_shape(fig4_right, "U2", "U3", "U4").is_fan());
  CHECK_THROWS(triple_shape(fig4_left, "U2", "U3", "U9"));

  // Permutation invariance.
  Rng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const auto t = oracle::random_tree(oracle::labels(7), rng);
    std::vector<std::string> p{"U1", "U4", "U6"};
    const auto ref = triple_shape(t, p[0], p[1], p[2]);
    std::sort(p.begin(), p.end());
    do {
      CHECK(triple_shape(t, p[0], p[1], p[2]) == ref);
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST_CASE("decompose") {
  const auto t = decompose(nwk("((U1,U2),(U3,U4));"));
  CHECK(t.size() == 4);
  CHECK(t.shape("U1", "U2", "U3") == TripleShape::cherry("U1", "U2", "U3"));
  CHECK(t.shape("U1", "U2", "U4") == TripleShape::cherry("U1", "U2", "U4"));
  CHECK(t.shape("U1", "U3", "U4") == TripleShape::cherry("U3", "U4", "U1"));
  CHECK(t.shape("U2", "U3", "U4") == TripleShape::cherry("U3", "U4", "U2"));

  const auto fan = decompose(make_fan(oracle::labels(6)));
  for (const auto& s : fan.shapes()) CHECK(s.is_fan());
  CHECK(fan.size() == 20);

  const auto cat = decompose(nwk("((((U1,U2),U3),U4),U5);"));
  CHECK(cat.size() == 10);
  CHECK(cat.shape("U3", "U4", "U5") == TripleShape::cherry("U3", "U4", "U5"));
  // Shapes agree with the per-triple definition.
  const auto tree = nwk("((((U1,U2),U3),U4),U5);");
  for (const auto& s : cat.shapes()) CHECK(s == triple_shape(tree, s.leaves[0], s.leaves[1], s.leaves[2]));

  CHECK_THROWS(decompose(nwk("(A,B);")));
}

TEST_CASE("reconstruct inverts decompose") {
  CHECK(isomorphic(reconstruct(decompose(nwk("((U1,U2),(U3,U4));"))), nwk("((U1,U2),(U3,U4));")));
  TripleSet fans(oracle::labels(5));
  for (int k = 2; k < 5; ++k)
    for (int j = 1; j < k; ++j)
      for (int i = 0; i < j; ++i) fans.set_fan(i, j, k);
  CHECK(isomorphic(reconstruct(fans), make_fan(oracle::labels(5))));

  // Caterpillars are where plain majority voting fails.
  const auto cat = nwk("((1,(2,(3,(4,5)))),6);");
  CHECK(isomorphic(reconstruct(decompose(cat)), cat));

  const auto fig5 = nwk("((U1,U2,(U3,U4,U5)),(U6,(U7,U8)),((U9,U10,U11,U12,U13),U14,U15));");
  CHECK(isomorphic(reconstruct(decompose(fig5)), fig5));

  Rng rng(2024);
  for (int rep = 0; rep < 300; ++rep) {
    const auto t = oracle::random_tree(oracle::labels(3 + rep % 10), rng);
    CHECK(isomorphic(reconstruct(decompose(t)), t));
  }
  TripleSet partial(oracle::labels(4));
  CHECK_THROWS(reconstruct(partial));
}

TEST_CASE("reconstruct is total on arbitrary triple sets") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 3 + rep % 8;
    TripleSet ts(oracle::labels(d));
    for (int k = 2; k < d; ++k)
      for (int j = 1; j < k; ++j)
        for (int i = 0; i < j; ++i)
          ts.set_code(i, j, k, static_cast<std::int8_t>(static_cast<int>(uniform_index(rng, 4)) - 1));
    const auto t = reconstruct(ts);
    CHECK(t.leaf_count() == d);
  }
}

TEST_CASE("tree distances") {
  const auto a = nwk("((1,2),(3,4));");
  const auto b = nwk("(1,2,(3,4));");
  CHECK(tree_distance_tri(a, a) == 0);
  CHECK(tree_distance_tri(a, b) == 2);
  CHECK(tree_distance_tri(b, a) == 2);
  CHECK_THROWS(tree_distance_tri(a, nwk("((1,2),(3,5));")));

  const auto bin = nwk("(((1,2),3),(4,5));");
  long cherries = 0;
  for (const auto& s : decompose(bin).shapes()) cherries += s.is_fan() ? 0 : 1;
  CHECK(tree_distance_tri(bin, make_fan(bin.sorted_labels())) == cherries);

  Rng rng(77);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 3 + rep % 9;
    const auto x = oracle::random_tree(oracle::labels(d), rng);
    const auto y = oracle::random_tree(oracle::labels(d), rng);
    const long tri = tree_distance_tri(x, y);
    CHECK(tri == tree_distance_tri(y, x));
    CHECK(tri >= 0);
    CHECK(tri <= binomial3(d));
    CHECK((tri == 0) == (tree_distance_01(x, y) == 0));
  }
}

TEST_CASE("collapse_edge") {
  const auto left = nwk("(U1,(U2,(U3,U4)));");
  const int n34 = left.lca(left.find_leaf("U3"), left.find_leaf("U4"));
  CHECK(isomorphic(collapse_edge(left, n34), nwk("(U1,(U2,U3,U4));")));
  const auto small = nwk("((1,2),3);");
  CHECK(isomorphic(collapse_edge(small, small.lca(small.find_leaf("1"), small.find_leaf("2"))), nwk("(1,2,3);")));
  CHECK_THROWS(collapse_edge(small, small.root()));
  CHECK_THROWS(collapse_edge(small, small.find_leaf("3")));

  Rng rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    auto t = oracle::random_tree(oracle::labels(3 + rep % 10), rng);
    const auto labels = t.sorted_labels();
    while (t.internal_count() > 1) {
      int pick = -1;
      for (int v : t.internal_nodes())
        if (v != t.root()) pick = v;
      const int before = t.internal_count();
      t = collapse_edge(t, pick);
      CHECK(t.internal_count() == before - 1);
      CHECK(t.sorted_labels() == labels);
    }
    CHECK(isomorphic(t, make_fan(labels)));
  }
}

TEST_CASE("unrooted trees and outgroup rooting") {
  // ((U1,U3),(U2,U4),O) as an unrooted tree.
  const auto unrooted = UnrootedTree::from_rooted(nwk("((U1,U3),(U2,U4),O);"));
  CHECK(unrooted.is_binary());
  CHECK(isomorphic(root_with_outgroup(unrooted, "O"), nwk("((U1,U3),(U2,U4));")));
  CHECK_THROWS(root_with_outgroup(unrooted, "X"));

  Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const auto t = oracle::random_tree(oracle::labels(2 + rep % 10), rng);
    CHECK(isomorphic(root_with_outgroup(attach_outgroup(t, "O"), "O"), t));
  }

  // A rooted binary tree and its re-rooting share one unrooted topology.
  const auto a = UnrootedTree::from_rooted(nwk("((A,B),(C,D));"));
  const auto b = UnrootedTree::from_rooted(nwk("(A,(B,(C,D)));"));
  CHECK(a.canonical() == b.canonical());
  CHECK(a.canonical() != UnrootedTree::from_rooted(nwk("((A,C),(B,D));")).canonical());

  CHECK_THROWS(UnrootedTree({"A", "B", "C"}, {{3}, {3}, {3}, {0, 1}}));
}
