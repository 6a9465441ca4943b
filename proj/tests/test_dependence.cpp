#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "nacest/builders.hpp"
#include "nacest/csv.hpp"
#include "nacest/dependence.hpp"
#include "nacest/errors.hpp"
#include "nacest/random.hpp"
#include "oracles.hpp"

using namespace nacest;

namespace {

std::vector<double> uniforms(Rng& rng, int n) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform01(rng);
  return v;
}

Dataset make_dataset(const Eigen::MatrixXd& values) {
  Dataset d;
  d.values = values;
  for (Eigen::Index j = 0; j < values.cols(); ++j) d.column_names.push_back("V" + std::to_string(j + 1));
  return d;
}

}  // namespace

TEST_CASE("pseudo observations") {
  Eigen::MatrixXd v(3, 2);
  v << 10, 5, 20, 5, 30, 9;
  const auto u = pseudo_observations(make_dataset(v));
  CHECK(u.u(0, 0) == 0.25);
  CHECK(u.u(1, 0) == 0.5);
  CHECK(u.u(2, 0) == 0.75);
  CHECK(u.u(0, 1) == 0.375);
  CHECK(u.u(1, 1) == 0.375);
  CHECK(u.u(2, 1) == 0.75);
  CHECK(u.labels == std::vector<std::string>{"V1", "V2"});

  Rng rng(3);
  Eigen::MatrixXd big(200, 3);
  for (Eigen::Index i = 0; i < big.rows(); ++i) big.row(i) << i * 0.5, uniform01(rng), std::floor(uniform01(rng) * 7);
  const auto p = pseudo_observations(make_dataset(big));
  CHECK(p.u.minCoeff() > 0.0);
  CHECK(p.u.maxCoeff() < 1.0);
  for (Eigen::Index i = 1; i < big.rows(); ++i) CHECK(p.u(i, 0) > p.u(i - 1, 0));
  // Average ranks keep each column's mean at 1/2.
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(p.u.col(j).mean() == doctest::Approx(0.5).epsilon(1e-12));

  Eigen::MatrixXd two(2, 2);
  two << 1, 2, 3, 4;
  CHECK_THROWS_AS(make_dataset(two).validate(), std::invalid_argument);
  Dataset dup = make_dataset(v);
  dup.column_names[1] = "V1";
  CHECK_THROWS(dup.validate());
}

TEST_CASE("kendall tau examples") {
  const std::vector<double> a{1, 2, 3}, b{3, 2, 1};
  CHECK(kendall_tau(a, a) == 1.0);
  CHECK(kendall_tau(a, b) == -1.0);
  CHECK(kendall_tau(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 1, 4, 3}) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS(kendall_tau(std::vector<double>{1}, std::vector<double>{1}));
  CHECK_THROWS(kendall_tau(a, std::vector<double>{1, 2}));
  // Ties count as neither.
  CHECK(kendall_tau(std::vector<double>{1, 1, 2}, std::vector<double>{1, 2, 3}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("kendall tau matches the quadratic oracle") {
  Rng rng(101);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 400));
    auto x = uniforms(rng, n);
    auto y = uniforms(rng, n);
    if (rep % 3 == 0)
      for (int i = 0; i < n; ++i) y[i] = 0.7 * x[i] + 0.3 * y[i];
    CHECK(kendall_tau(x, y) == oracle::kendall_tau(x, y));
  }
  // With ties.
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 100));
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = std::floor(uniform01(rng) * 5);
      y[i] = std::floor(uniform01(rng) * 5);
    }
    CHECK(kendall_tau(x, y) == doctest::Approx(oracle::kendall_tau(x, y)).epsilon(1e-14));
  }
}

TEST_CASE("kendall tau is invariant under increasing transforms") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = uniforms(rng, 300);
    const auto y = uniforms(rng, 300);
    std::vector<double> tx(x.size()), ty(y.size());
    std::transform(x.begin(), x.end(), tx.begin(), [](double v) { return std::exp(3 * v) - 2; });
    std::transform(y.begin(), y.end(), ty.begin(), [](double v) { return std::log(v); });
    CHECK(kendall_tau(x, y) == kendall_tau(tx, ty));
  }
}

TEST_CASE("dominance counts") {
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 2 + rep * 7;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = std::floor(uniform01(rng) * (rep % 2 ? 4 : 1000));
      y[i] = std::floor(uniform01(rng) * 6);
    }
    const auto rx = dense_ranks(x);
    const auto ry = dense_ranks(y);
    const auto c = dominance_counts(rx, ry);
    for (int i = 0; i < n; ++i) {
      int ref = 0;
      for (int j = 0; j < n; ++j) ref += (x[j] < x[i] && y[j] < y[i]) ? 1 : 0;
      CHECK(c[i] == ref);
    }
  }
}

TEST_CASE("empirical kendall distribution") {
  const std::vector<double> a{1, 2, 3}, b{3, 2, 1};
  CHECK(empirical_kendall_distribution(a, a).w == std::vector<double>{0, 0.5, 1});
  CHECK(empirical_kendall_distribution(a, b).w == std::vector<double>{0, 0, 0});
  const auto two = empirical_kendall_distribution(std::vector<double>{0.2, 0.9}, std::vector<double>{0.4, 0.1});
  for (double w : two.w) CHECK((w == 0.0 || w == 1.0));

  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = uniforms(rng, 50 + rep);
    const auto y = uniforms(rng, 50 + rep);
    const auto k = empirical_kendall_distribution(x, y);
    CHECK(k.w == oracle::kendall_scores(x, y));
    CHECK(std::is_sorted(k.w.begin(), k.w.end()));
    CHECK(k.w.front() >= 0.0);
    CHECK(k.w.back() <= 1.0);
    CHECK(kendall_dist_distance(k, empirical_kendall_distribution(y, x)) == 0.0);
  }
}

TEST_CASE("kendall distribution distance") {
  const KendallDistribution co{{0, 0.5, 1}}, counter{{0, 0, 0}};
  CHECK(kendall_dist_distance(co, co) == 0.0);
  // F_co is 1/3 on [0, .5), 2/3 on [.5, 1); F_counter is 1.
  CHECK(kendall_dist_distance(co, counter) == doctest::Approx(5.0 / 18.0).epsilon(1e-14));
  CHECK(kendall_dist_distance(counter, co) == kendall_dist_distance(co, counter));
  CHECK_THROWS(kendall_dist_distance(co, KendallDistribution{}));

  Rng rng(13);
  for (int rep = 0; rep < 40; ++rep) {
    const auto x = uniforms(rng, 30), y = uniforms(rng, 30), z = uniforms(rng, 20 + rep);
    // kb has 20 points, kc a comonotone sample of a different size.
    const auto ka = empirical_kendall_distribution(x, y);
    const auto kb = empirical_kendall_distribution(std::vector<double>(y.begin(), y.begin() + 20), std::vector<double>(z.begin(), z.begin() + 20));
    const KendallDistribution kc{oracle::kendall_scores(z, z)};
    CHECK(kendall_dist_distance(ka, kb) == doctest::Approx(oracle::cvm(ka.w, kb.w)).epsilon(1e-12));
    CHECK(kendall_dist_distance(ka, kc) == doctest::Approx(oracle::cvm(ka.w, kc.w)).epsilon(1e-12));
    CHECK(kendall_dist_distance(ka, kc) == kendall_dist_distance(kc, ka));
  }
}

TEST_CASE("independence deviation") {
  CHECK(independence_kendall_cdf(0.0) == 0.0);
  CHECK(independence_kendall_cdf(1.0) == 1.0);
  CHECK(independence_kendall_cdf(0.5) == doctest::Approx(0.5 + 0.5 * std::log(2.0)));

  Rng rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = uniforms(rng, 40), y = uniforms(rng, 40);
    const auto k = empirical_kendall_distribution(x, y);
    CHECK(independence_deviation(k) == doctest::Approx(oracle::independence_deviation(k.w)).epsilon(1e-9));
  }

  // The empirical CDF placed on a fine grid of K_perp's own quantiles.
  std::vector<double> q;
  const int m = 4000;
  for (int i = 1; i <= m; ++i) {
    const double target = (i - 0.5) / m;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (independence_kendall_cdf(mid) < target ? lo : hi) = mid;
    }
    q.push_back(0.5 * (lo + hi));
  }
  CHECK(independence_deviation(KendallDistribution{q}) < 1e-7);

  // Comonotone: K_n(t) tends to t, giving the integral of (t log t)^2 = 2/27.
  double prev = 0.0;
  for (int n : {10, 100, 1000, 10000}) {
    std::vector<double> r(n);
    std::iota(r.begin(), r.end(), 0.0);
    const double dev = independence_deviation(r, r);
    CHECK(dev > prev);
    CHECK(dev < 2.0 / 27.0);
    prev = dev;
  }
  CHECK(prev == doctest::Approx(2.0 / 27.0).epsilon(1e-3));

  std::vector<double> med;
  for (int s = 0; s < 50; ++s) {
    Rng r(1000 + s);
    med.push_back(independence_deviation(uniforms(r, 10000), uniforms(r, 10000)));
  }
  std::nth_element(med.begin(), med.begin() + 25, med.end());
  CHECK(med[25] < 0.002);
}

TEST_CASE("hoeffding D") {
  std::vector<double> r(10);
  std::iota(r.begin(), r.end(), 1.0);
  CHECK(hoeffding_d(r, r) == doctest::Approx(oracle::hoeffding_d(r, r)).epsilon(1e-12));
  CHECK(hoeffding_d(r, r) == doctest::Approx(1.0));
  CHECK_THROWS(hoeffding_d(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4}));

  Rng rng(15);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 5 + rep * 3;
    std::vector<double> x = uniforms(rng, n), y = uniforms(rng, n);
    if (rep % 2) {
      for (auto& v : x) v = std::floor(v * 4);
      for (auto& v : y) v = std::floor(v * 3);
    }
    const double fast = hoeffding_d(x, y);
    CHECK(std::abs(fast - oracle::hoeffding_d(x, y)) < 1e-12);
    CHECK(fast <= hoeffding_d(r, r) + 1e-12);
    const auto rx = average_ranks(x), ry = average_ranks(y);
    CHECK(std::abs(hoeffding_d(rx, ry) - fast) < 1e-12);
  }

  // Comonotone is the maximum among random samples of the same size.
  std::vector<double> ramp(10);
  std::iota(ramp.begin(), ramp.end(), 0.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = uniforms(rng, 10), y = uniforms(rng, 10);
    CHECK(hoeffding_d(x, y) <= hoeffding_d(ramp, ramp) + 1e-12);
  }

  Rng big(16);
  const auto x = uniforms(big, 100000), y = uniforms(big, 100000);
  CHECK(std::abs(hoeffding_d(x, y)) < 0.001);
}

TEST_CASE("dependence matrices") {
  Rng rng(17);
  const int n = 300;
  // Blocks {V1, V2}, {V3, V4}, and V5 alone.
  Eigen::MatrixXd v(n, 5);
  for (int i = 0; i < n; ++i) {
    const double a = uniform01(rng), b = uniform01(rng);
    v.row(i) << a, a, b, b, uniform01(rng);
  }
  const auto data = make_dataset(v);
  for (auto kind : {DependenceKind::KT, DependenceKind::HD, DependenceKind::KIND}) {
    CAPTURE(to_string(kind));
    const auto m = dependence_matrix(data, kind);
    CHECK(m.values.rows() == 5);
    CHECK((m.values - m.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.values.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.values.allFinite());
    CHECK(m.values.minCoeff() >= 0.0);
    CHECK(m.values(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.values(2, 3) == doctest::Approx(0.0).epsilon(1e-12));
    const auto tree = average_linkage(m);
    CHECK(tree.lca(tree.find_leaf("V1"), tree.find_leaf("V2")) != tree.root());
    CHECK(tree.lca(tree.find_leaf("V3"), tree.find_leaf("V4")) != tree.root());
    const int c12 = tree.lca(tree.find_leaf("V1"), tree.find_leaf("V2"));
    const int c34 = tree.lca(tree.find_leaf("V3"), tree.find_leaf("V4"));
    CHECK(tree.children(c12).size() == 2);
    CHECK(tree.children(c34).size() == 2);
  }

  Rng big(18);
  Eigen::MatrixXd ind(100000, 2);
  for (Eigen::Index i = 0; i < ind.rows(); ++i) ind.row(i) << uniform01(big), uniform01(big);
  CHECK(std::abs(dependence_matrix(make_dataset(ind), DependenceKind::KT).values(0, 1) - 1.0) < 0.02);

  CHECK(parse_dependence_kind("HD") == DependenceKind::HD);
  CHECK(parse_dependence_kind("Kind") == DependenceKind::KIND);
  CHECK_THROWS(parse_dependence_kind("spearman"));
}

TEST_CASE("csv") {
  const auto d = parse_csv("a,b\n1,2\n3,4.5\n-1e-3,7\n");
  CHECK(d.column_names == std::vector<std::string>{"a", "b"});
  CHECK(d.values(2, 0) == -1e-3);
  CHECK(d.values(1, 1) == 4.5);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2\n3\n4,5\n"), DataError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,x\n3,4\n4,5\n"), DataError);
  CHECK_THROWS_AS(parse_csv("a,a\n1,2\n3,4\n4,5\n"), DataError);
  CHECK_THROWS_AS(parse_csv("a,b\n1,2\n"), DataError);

  std::ostringstream out;
  write_csv(out, d);
  const auto back = parse_csv(out.str());
  CHECK(back.values == d.values);
  CHECK(back.column_names == d.column_names);
}
