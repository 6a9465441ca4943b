#include <doctest.h>

#include <numeric>
#include <unordered_map>

#include "nacest/collapse.hpp"
#include "nacest/nac.hpp"
#include "nacest/newick.hpp"
#include "oracles.hpp"

using namespace nacest;

namespace {

RootedTree nwk(const std::string& s) { return parse_newick(s); }

PseudoObservations sample_u(const std::string& newick, Family family, int n, std::uint64_t seed) {
  return pseudo_observations(sample(NacSpec::from_annotated_newick(newick, family), n, seed));
}

double tau_of(const PseudoObservations& u, const std::string& a, const std::string& b) {
  return kendall_tau(u.col(u.column(a)), u.col(u.column(b)));
}

int node_of(const RootedTree& t, const std::string& a, const std::string& b) {
  return t.lca(t.find_leaf(a), t.find_leaf(b));
}

}  // namespace

TEST_CASE("node tau summaries") {
  const auto u = sample_u("(U1,(U2,(U3,U4)0.6)0.4)0.2;", Family::Clayton, 400, 1);
  const auto left = nwk("(U1,(U2,(U3,U4)));");
  const auto s34 = node_tau_summary(left, node_of(left, "U3", "U4"), u);
  CHECK(s34.mean_tau == doctest::Approx(tau_of(u, "U3", "U4")).epsilon(1e-14));
  const auto s234 = node_tau_summary(left, node_of(left, "U2", "U3"), u);
  CHECK(s234.mean_tau == doctest::Approx((tau_of(u, "U2", "U3") + tau_of(u, "U2", "U4")) / 2).epsilon(1e-14));

  const auto fan = make_fan(oracle::labels(4));
  double all = 0.0;
  for (int i = 1; i <= 4; ++i)
    for (int j = i + 1; j <= 4; ++j) all += tau_of(u, "U" + std::to_string(i), "U" + std::to_string(j));
  CHECK(node_tau_summary(fan, fan.root(), u).mean_tau == doctest::Approx(all / 6).epsilon(1e-14));
  CHECK_THROWS(node_tau_summary(left, left.find_leaf("U1"), u));

  const auto annotated = annotate_mean_tau(left, u);
  for (int v : annotated.internal_nodes()) {
    REQUIRE(annotated.node(v).annotation.has_value());
    CHECK(*annotated.node(v).annotation >= -1.0);
    CHECK(*annotated.node(v).annotation <= 1.0);
  }
}

TEST_CASE("kagg collapse") {
  const auto u = sample_u("(U1,(U2,U3,U4)0.6)0.2;", Family::Clayton, 500, 2);
  const auto left = nwk("(U1,(U2,(U3,U4)));");
  const double gap = std::abs(node_tau_summary(left, node_of(left, "U2", "U3"), u).mean_tau -
                              node_tau_summary(left, node_of(left, "U3", "U4"), u).mean_tau);
  const double top_gap = std::abs(node_tau_summary(left, left.root(), u).mean_tau -
                                  node_tau_summary(left, node_of(left, "U2", "U3"), u).mean_tau);
  REQUIRE(gap < top_gap);
  const double tc = 0.5 * (gap + top_gap);
  CHECK(isomorphic(collapse_kagg(left, u, tc), nwk("(U1,(U2,U3,U4));")));
  CHECK(isomorphic(collapse_kagg(left, u, gap * 0.999), left));
  CHECK(isomorphic(collapse_kagg(left, u, 0.0), left));
  CHECK(isomorphic(collapse_kagg(left, u, 2.0), make_fan(oracle::labels(4))));

  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 4 + rep % 6;
    const auto truth = oracle::random_tree(oracle::labels(d), rng);
    // Taus increasing with depth.
    std::unordered_map<int, double> taus;
    for (int v : truth.internal_nodes()) taus[v] = 0.1 + 0.12 * truth.depth(v);
    const auto filled =
        NacSpec::from_annotated_newick(write_newick(truth.with_annotations(taus), true), Family::Clayton);
    const auto w = pseudo_observations(sample(filled, 200, 10 + rep));
    const auto binary = oracle::random_tree(oracle::labels(d), rng, false);
    int prev = binary.internal_count() + 1;
    for (double tc : {0.0, 0.025, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0, 2.0}) {
      const auto c = collapse_kagg(binary, w, tc);
      CHECK(c.sorted_labels() == binary.sorted_labels());
      CHECK(c.internal_count() <= prev);
      prev = c.internal_count();
      CHECK(isomorphic(collapse_kagg(c, w, tc), c));
    }
    CHECK(prev == 1);
  }
}

TEST_CASE("triple test") {
  const auto u = sample_u("((U2,U3)0.8,U1)0.2;", Family::Clayton, 300, 4);
  const double p = su_triple_test(u, "U1", "U2", "U3", 100, 7);
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
  CHECK(p >= 1.0 / 101.0);
  std::vector<std::string> perm{"U1", "U2", "U3"};
  do {
    CHECK(su_triple_test(u, perm[0], perm[1], perm[2], 100, 7) == p);
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK_THROWS(su_triple_test(u, "U1", "U1", "U3", 100, 7));
  CHECK_THROWS(su_triple_test(u, "U1", "U2", "U3", 0, 7));

  TripleTester tester(u, 100, 7);
  CHECK(tester.p_value(0, 1, 2) == p);
  CHECK(tester.p_value(2, 0, 1) == p);
  CHECK(tester.tests_run() == 1);

  // Fan data gives spread-out p-values; cherry data gives small ones.
  int fan_rejects = 0, cherry_rejects = 0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    const auto f = sample_u("(U1,U2,U3)0.4;", Family::Clayton, 300, 100 + s);
    fan_rejects += su_triple_test(f, "U1", "U2", "U3", 100, s) <= 0.05 ? 1 : 0;
    const auto c = sample_u("((U2,U3)0.8,U1)0.2;", Family::Clayton, 300, 200 + s);
    cherry_rejects += su_triple_test(c, "U1", "U2", "U3", 100, s) <= 0.05 ? 1 : 0;
  }
  CHECK(fan_rejects <= 8);
  CHECK(cherry_rejects >= 32);
}

TEST_CASE("kb collapse") {
  const auto left = nwk("(U1,(U2,(U3,U4)));");
  const auto fan_below = sample_u("(U1,(U2,U3,U4)0.6)0.2;", Family::Clayton, 500, 5);
  const auto resolved = sample_u("(U1,(U2,(U3,U4)0.85)0.4)0.1;", Family::Clayton, 500, 6);

  // Only (U2, U3, U4) changes when 34 merges into 234.
  TripleTester t1(fan_below, 200, 1);
  const auto p = t1.p_value(1, 2, 3);
  const auto c1 = collapse_kb(left, t1, 0.05);
  if (p > 0.05) CHECK(c1.children(node_of(c1, "U2", "U3")).size() == 3);
  else CHECK(c1.children(node_of(c1, "U2", "U3")).size() == 2);

  CHECK(isomorphic(collapse_kb(left, resolved, 0.05, 200, 1), left));
  CHECK(isomorphic(collapse_kb(left, fan_below, 1.0, 200, 1), left));
  CHECK(isomorphic(collapse_kb(left, resolved, 0.0, 50, 1), make_fan(oracle::labels(4))));

  // Reproducible, and always a coarsening of the input.
  Rng rng(7);
  for (int rep = 0; rep < 6; ++rep) {
    const auto tree = oracle::random_tree(oracle::labels(6), rng, false);
    const auto w = sample_u("((U1,U2,U3)0.5,(U4,U5,U6)0.5)0.1;", Family::Clayton, 200, 40 + rep);
    const auto a = collapse_kb(tree, w, 0.1, 50, rep);
    const auto b = collapse_kb(tree, w, 0.1, 50, rep);
    CHECK(write_newick(a) == write_newick(b));
    CHECK(a.sorted_labels() == tree.sorted_labels());
    CHECK(a.internal_count() <= tree.internal_count());
    for (int v : a.internal_nodes()) {
      const auto clade = a.clade(v);
      bool found = false;
      for (int x : tree.internal_nodes()) found = found || tree.clade(x) == clade;
      CHECK(found);
    }
  }
}

TEST_CASE("collapse config and estimator names") {
  CollapseConfig c;
  CHECK_NOTHROW(c.validate());
  c.tau_c = -0.1;
  CHECK_THROWS(c.validate());
  c = CollapseConfig{};
  c.alpha = 1.5;
  CHECK_THROWS(c.validate());
  c = CollapseConfig{};
  c.bootstrap_B = 0;
  CHECK_THROWS(c.validate());

  const auto e = parse_estimator("kt_kagg");
  CHECK_FALSE(e.baseline);
  CHECK(e.method == BinaryMethod::KT);
  CHECK(e.rule == CollapseRule::KAGG);
  const auto f = parse_estimator("njnni_KB");
  CHECK(f.method == BinaryMethod::NJNNI);
  CHECK(f.rule == CollapseRule::KB);
  CHECK(f.name == "NJNNI_kb");
  CHECK(parse_estimator("SU_baseline").baseline);
  CHECK_THROWS(parse_estimator("kt"));
  CHECK_THROWS(parse_estimator("kt_avg"));
  CHECK_THROWS(parse_estimator("foo_kagg"));
}

TEST_CASE("estimate_structure") {
  const auto spec = NacSpec::from_annotated_newick("((U1,U2)0.8,(U3,U4)0.8)0.2;", Family::Clayton);
  const auto data = sample(spec, 500, 11);
  CollapseConfig cfg;
  cfg.tau_c = 0.0;
  for (auto m : {BinaryMethod::KT, BinaryMethod::HD, BinaryMethod::KIND, BinaryMethod::NJNNI, BinaryMethod::RNIX}) {
    const auto t = estimate_structure(data, m, cfg);
    CHECK(t.internal_count() == 3);
  }
  cfg.tau_c = 0.075;
  CHECK(isomorphic(estimate_structure(data, BinaryMethod::KT, cfg), nwk("((U1,U2),(U3,U4));")));
  cfg.rule = CollapseRule::KB;
  CHECK(isomorphic(estimate_structure(data, BinaryMethod::NJNNI, cfg), nwk("((U1,U2),(U3,U4));")));
}
