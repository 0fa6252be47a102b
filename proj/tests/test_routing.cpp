#include <random>

#include "doctest.h"
#include "support.hpp"
#include "wnet/routing.hpp"

using namespace wnet;
using testsupport::fixture;

namespace {

long choose(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

ProtocolConfig ring(int k) { return load_topology(fixture("ring3.json"), k); }

}  // namespace

TEST_CASE("multiset laws on random bags") {
  std::mt19937_64 rng(17);
  auto bag = [&] {
    ValueMultiset b;
    int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) b.add(static_cast<std::int64_t>(rng() % 5) - 2);
    return b;
  };
  for (int round = 0; round < 200; ++round) {
    ValueMultiset a = bag(), b = bag(), c = bag();
    std::int64_t v = static_cast<std::int64_t>(rng() % 5) - 2;
    CHECK(a.united(b) == b.united(a));
    CHECK(a.united(b).united(c) == a.united(b.united(c)));
    CHECK(a.united(ValueMultiset{}) == a);
    CHECK(a.united(b).size() == a.size() + b.size());
    CHECK(a.plus(v).minus(v) == a);
    CHECK(a.plus(v).count(v) == a.count(v) + 1);
    if (a.contains(v)) {
      CHECK(a.minus(v).plus(v) == a);
      CHECK(a.minus(v).size() == a.size() - 1);
    } else {
      CHECK(a.minus(v) == a);
    }
    auto back = ValueMultiset::from_key(a.key());
    REQUIRE(back);
    CHECK(*back == a);
  }
  CHECK(ValueMultiset{}.key() == "e");
  CHECK(ValueMultiset{-3, 2, 2}.key() == "n3_2_2");
  CHECK_FALSE(ValueMultiset::from_key("1__2"));
  CHECK_FALSE(ValueMultiset::from_key("x"));
}

TEST_CASE("bag enumeration matches the stars-and-bars count") {
  for (int n = 1; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      std::vector<std::int64_t> vs;
      for (int i = 0; i < n; ++i) vs.push_back(i);
      auto bags = bags_up_to(vs, m);
      CHECK(static_cast<long>(bags.size()) == choose(n + m, m));
      for (const auto& b : bags) CHECK(b.size() <= m);
    }
}

TEST_CASE("topology validation") {
  CHECK(topology_violations(ring(1)).empty());
  CHECK(topology_violations(load_topology(fixture("line2.json"), 1)).empty());
  auto broken = load_topology(fixture("broken.json"), 1);
  auto v = topology_violations(broken);
  REQUIRE_FALSE(v.empty());
  bool names_n3 = false;
  for (const auto& s : v) names_n3 = names_n3 || s.find("n3") != std::string::npos;
  CHECK(names_n3);
  CHECK_THROWS_AS(protocol_members(broken), InvalidTopology);

  auto extra = make_config(2, {{"i", "n1"}, {"n1", "n2"}, {"n2", "o"}, {"n1", "o"}}, {}, 1);
  CHECK_FALSE(topology_violations(extra).empty());
  auto into_n1 = make_config(3, {{"i", "n1"}, {"n1", "n2"}, {"n3", "n1"}, {"n1", "n3"}, {"n3", "n2"}, {"n2", "o"}}, {}, 1);
  CHECK_FALSE(topology_violations(into_n1).empty());
  auto bad_row = make_config(2, {{"i", "n1"}, {"n1", "n2"}, {"n2", "o"}}, {{1, {{2, 0.5}}}}, 1);
  CHECK_FALSE(topology_violations(bad_row).empty());
}

TEST_CASE("default next-hop rows are uniform") {
  auto cfg = make_config(3, {{"i", "n1"}, {"n1", "n2"}, {"n1", "n3"}, {"n3", "n2"}, {"n2", "o"}}, {}, 1);
  CHECK(cfg.lambda[1][2] == doctest::Approx(0.5));
  CHECK(cfg.lambda[1][3] == doctest::Approx(0.5));
  CHECK(cfg.lambda[3][2] == doctest::Approx(1.0));
  CHECK(cfg.values == std::vector<std::int64_t>{1});
}

TEST_CASE("the specification stores and releases values") {
  Network spec = build_spec(2, {});
  CHECK(well_formed(spec));
  CHECK(interface(spec).in == std::set<std::string>{"i"});
  CHECK(interface(spec).out == std::set<std::string>{"o"});
  Alphabet a;
  a.channels = {"c"};
  a.values["i"] = {Value::integer(1), Value::integer(2)};
  Plts p = build_plts({spec}, a);
  // budget kk and a bag of size at most 2 - kk over two values
  CHECK(p.size() == 1 + 3 + 6);
  for (std::size_t s = 0; s < p.size(); ++s) {
    auto view = decode_routing_state(p.systems[s]);
    REQUIRE(view);
    REQUIRE(view->budget);
    CHECK(*view->budget + view->stored.at("m").size() <= 2);
  }
  CHECK(build_spec(0, {}).system.at("m")->name == "P0_e");
}

TEST_CASE("protocol states keep the message budget") {
  for (int k : {1, 2}) {
    ProtocolConfig cfg = ring(k);
    auto members = protocol_members(cfg);
    double total = 0;
    for (const auto& [n, w] : members) total += w;
    CHECK(total == doctest::Approx(1));
    CHECK(members.size() == 2);
    for (const auto& [impl, w] : members) {
      CHECK(well_formed(impl));
      Plts p = build_plts({impl}, routing_alphabet(cfg));
      std::vector<char> drained(p.size(), 0);
      for (std::size_t s = 0; s < p.size(); ++s) {
        auto view = decode_routing_state(p.systems[s]);
        REQUIRE(view);
        REQUIRE(view->budget);
        int held = 0;
        for (const auto& [node, bag] : view->stored) held += bag.size();
        CHECK(*view->budget >= 0);
        CHECK(*view->budget + held <= k);
        bool only_n2 = true;
        for (const auto& [node, bag] : view->stored)
          if (node != "n2" && !bag.empty()) only_n2 = false;
        drained[s] = only_n2;
      }
      for (std::size_t s = 0; s < p.size(); ++s) CHECK(weak_tau_to(p, static_cast<int>(s), drained));
    }
  }
}

TEST_CASE("protocol and specification are equivalent") {
  auto line = check_equiv(load_topology(fixture("line2.json"), 1));
  CHECK(line.equivalent);
  CHECK(line.convergent);
  auto r1 = check_equiv(ring(1));
  CHECK(r1.equivalent);
  REQUIRE(r1.members.size() == 2);
  for (const auto& m : r1.members) {
    CHECK(m.spec_le_impl);
    CHECK(m.impl_le_spec);
  }
}

TEST_CASE("dropping the output of n2 is detected") {
  ProtocolConfig cfg = load_topology(fixture("line2.json"), 1);
  cfg.drop_n2_output = true;
  auto rep = check_equiv(cfg);
  CHECK_FALSE(rep.equivalent);
}
