#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "wnet/compose.hpp"
#include "wnet/testing.hpp"

using namespace wnet;
using testsupport::net;

namespace {

ResultBounds run(const std::string& file, const std::string& m, const std::string& t) {
  auto e = extend(net(file, m), net(file, t));
  REQUIRE(e);
  return result_bounds(*e);
}

}  // namespace

TEST_CASE("coin tossing converges to certain success") {
  Network c = net("coin.net", "Coin");
  Mdp m = reduction_mdp(c);
  CHECK(m.size() == 2);
  for (int k = 1; k <= 20; ++k) {
    double expect = (std::ldexp(1.0, k) - 1) / std::ldexp(1.0, k);
    CHECK(std::abs(value_sweeps(m, k, true)[static_cast<std::size_t>(m.root)] - expect) <= 1e-12);
    CHECK(std::abs(value_sweeps(m, k, false)[static_cast<std::size_t>(m.root)] - expect) <= 1e-12);
  }
  ResultBounds r = result_bounds(c);
  CHECK(r.sup == doctest::Approx(1).epsilon(1e-9));
  CHECK(r.inf == doctest::Approx(1).epsilon(1e-9));
  CHECK_THROWS_AS(result_bounds(c, 1e-9, 5), NonConvergedIteration);
}

TEST_CASE("forwarding chains") {
  auto m = run("forwarding.net", "M", "T");
  CHECK(m.inf == doctest::Approx(0.8));
  CHECK(m.sup == doctest::Approx(0.8));
  auto n = run("forwarding.net", "N", "T");
  CHECK(n.inf == doctest::Approx(0.81));
  CHECK(n.sup == doctest::Approx(0.81));
  auto m1 = run("forwarding.net", "M1", "T");
  CHECK(m1.inf == doctest::Approx(0.5));
  CHECK(m1.sup == doctest::Approx(1));
  auto m2 = run("forwarding.net", "M2", "T");
  CHECK(m2.inf == doctest::Approx(1));
  CHECK(m2.sup == doctest::Approx(1));
}

TEST_CASE("a hand-built decision process") {
  // 0 chooses between a fair coin into {goal, dead} and a sure move to 2;
  // 2 reaches the goal with probability 0.3.
  Mdp m;
  m.actions = {{{{1, 0.5}, {3, 0.5}}, {{2, 1.0}}}, {}, {{{1, 0.3}, {3, 0.7}}}, {}};
  m.goal = {0, 1, 0, 0};
  auto hi = reach_values(m, true, 1e-12, 100);
  auto lo = reach_values(m, false, 1e-12, 100);
  CHECK(hi.values[0] == doctest::Approx(0.5));
  CHECK(lo.values[0] == doctest::Approx(0.3));
  CHECK(hi.values[3] == 0.0);
}

TEST_CASE("preorders compare the right bound") {
  ResultBounds a, b;
  a.sup = 0.8;
  a.inf = 0.1;
  b.sup = 0.5;
  b.inf = 0.5;
  CHECK_FALSE(compare_results(a, b, Preorder::Hoare));
  CHECK(compare_results(b, a, Preorder::Hoare));
  CHECK(compare_results(a, b, Preorder::Smith));
  CHECK_FALSE(compare_results(b, a, Preorder::Smith));
}

TEST_CASE("refuting with finite suites") {
  Network m = net("multicast.net", "M"), n = net("multicast.net", "N");
  std::vector<Network> t = {net("multicast.net", "T")}, t2 = {net("multicast.net", "T2")};
  auto may = refute(m, n, t, TestMode::May);
  REQUIRE(may);
  CHECK(may->reason == "test");
  CHECK(may->left.sup == doctest::Approx(1));
  CHECK(may->right.sup == doctest::Approx(0));
  CHECK_FALSE(refute(n, m, t, TestMode::May));
  CHECK(refute(n, m, t2, TestMode::Must));
  CHECK_FALSE(refute(m, n, t2, TestMode::Must));

  auto iface = refute(m, net("forwarding.net", "M"), t, TestMode::May);
  REQUIRE(iface);
  CHECK(iface->reason == "interface");

  RefuteStats st;
  std::vector<Network> bad = {net("wellformed.net", "M")};
  CHECK_FALSE(refute(m, n, bad, TestMode::May, 1e-9, &st));
  CHECK(st.skipped == 1);
}

TEST_CASE("generated tests are well-formed and reproducible") {
  Network m = net("compfail.net", "M"), n = net("compfail.net", "N");
  auto a = generate_tests({m, n}, 30, 3);
  auto b = generate_tests({m, n}, 30, 3);
  REQUIRE(a.size() == 30);
  int nonzero = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(well_formed(a[i]));
    CHECK(a[i].system == b[i].system);
    CHECK(a[i].graph == b[i].graph);
    CHECK_FALSE(omega_pred(a[i]));
    auto e = extend(m, a[i]);
    REQUIRE(e);
    if (result_bounds(*e).sup > 0) ++nonzero;
  }
  CHECK(nonzero > 0);
}

TEST_CASE("value of a distribution of systems") {
  Network t = net("div.net", "T");
  SystemDist d;
  d.add(t.system, 0.25);
  d.add(System{}.with("n", mk::omega()), 0.5);
  CHECK(value(d, *t.defs) == doctest::Approx(0.5));
}
