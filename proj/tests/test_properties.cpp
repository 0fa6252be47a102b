#include <random>

#include "doctest.h"
#include "support.hpp"
#include "wnet/checkers.hpp"
#include "wnet/compose.hpp"
#include "wnet/testing.hpp"

using namespace wnet;
using testsupport::Gen;

namespace {

constexpr int kCases = 200;

using D = SubDistribution<int>;

D random_dist(std::mt19937_64& rng, int lo, int hi, bool full) {
  int n = 1 + static_cast<int>(rng() % 4);
  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0;
  for (auto& x : w) total += x = 1 + static_cast<double>(rng() % 7);
  double mass = full ? 1.0 : 0.25 + static_cast<double>(rng() % 4) / 4.0;
  D d;
  for (int i = 0; i < n; ++i) d.add(lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1)), mass * w[static_cast<std::size_t>(i)] / total);
  return d;
}

bool same_graph_and_system(const Network& a, const Network& b) { return a.graph == b.graph && a.system == b.system; }

using StepSet = std::vector<std::pair<NetAction, SystemDist>>;

void add_unique(StepSet& s, const NetAction& a, SystemDist d) {
  for (const auto& [x, e] : s)
    if (x == a && same_dist(e, d)) return;
  s.emplace_back(a, std::move(d));
}

bool same_steps(const StepSet& a, const StepSet& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [x, d] : a) {
    bool found = false;
    for (const auto& [y, e] : b) found = found || (x == y && same_dist(d, e));
    if (!found) return false;
  }
  return true;
}

StepSet steps_of(const Network& n) {
  StepSet s;
  for (auto& st : net_steps(n)) add_unique(s, st.act, std::move(st.target));
  return s;
}

System merge_systems(const System& a, const System& b) {
  System out = a;
  for (const auto& [n, s] : b.nodes) out = out.with(n, s);
  return out;
}

SystemDist product(const SystemDist& a, const SystemDist& b) {
  return product_image<System>([](const System& x, const System& y) { return merge_systems(x, y); }, a, b);
}

Alphabet small_alphabet(const Network& n) {
  Alphabet a;
  a.channels = {"c", "d"};
  for (const auto& i : interface(n).in) a.values[i] = {Value::integer(0), Value::integer(1)};
  return a;
}

}  // namespace

TEST_CASE("lifting witnesses recombine to both sides") {
  std::mt19937_64 rng(101);
  int found = 0;
  for (int c = 0; c < kCases; ++c) {
    D left = random_dist(rng, 0, 4, true), right = random_dist(rng, 10, 14, true);
    std::vector<std::pair<int, int>> rel;
    for (int a = 0; a <= 4; ++a)
      for (int b = 10; b <= 14; ++b)
        if (rng() % 2) rel.emplace_back(a, b);
    if (auto w = lift_check(rel, left, right)) {
      ++found;
      CHECK(w->left_side().approx_equal(left, 1e-9));
      CHECK(w->right_side().approx_equal(right, 1e-9));
      for (const auto& p : w->parts) {
        bool in_rel = false;
        for (const auto& [a, b] : rel) in_rel = in_rel || (a == p.left && p.right.weight(b) > 0);
        CHECK(in_rel);
      }
    }
  }
  CHECK(found > 20);

  // Rows built from a known combination are always recovered.
  for (int c = 0; c < kCases; ++c) {
    std::vector<std::pair<int, D>> rel;
    int rows = 2 + static_cast<int>(rng() % 5);
    for (int r = 0; r < rows; ++r) rel.emplace_back(static_cast<int>(rng() % 3), random_dist(rng, 10, 14, rng() % 2 == 0));
    D left, right;
    std::vector<double> coef(rel.size(), 0.0);
    double total = 0;
    for (auto& x : coef) total += x = static_cast<double>(rng() % 4);
    if (total == 0) {
      coef[0] = 1;
      total = 1;
    }
    for (std::size_t r = 0; r < rel.size(); ++r) {
      double p = coef[r] / total;
      left.add(rel[r].first, p);
      for (const auto& [b, w] : rel[r].second) right.add(b, p * w);
    }
    auto w = lift_check(rel, left, right);
    REQUIRE(w);
    CHECK(w->left_side().approx_equal(left, 1e-7));
    CHECK(w->right_side().approx_equal(right, 1e-7));
  }
}

TEST_CASE("images and products preserve mass") {
  std::mt19937_64 rng(202);
  for (int c = 0; c < kCases; ++c) {
    D a = random_dist(rng, 0, 9, false), b = random_dist(rng, 0, 9, rng() % 2 == 0);
    int m = 1 + static_cast<int>(rng() % 4);
    auto img = map_image<int>([m](int x) { return x % m; }, a);
    CHECK(img.mass() == doctest::Approx(a.mass()));
    auto prod = product_image<int>([](int x, int y) { return 10 * x + y; }, a, b);
    CHECK(prod.mass() == doctest::Approx(a.mass() * b.mass()));
    auto fst = product_image<int>([](int x, int) { return x; }, a, b);
    CHECK(fst.approx_equal(a.scaled(b.mass()), 1e-12));
  }
}

TEST_CASE("extension is associative and keeps networks well-formed") {
  Gen g(303);
  int both = 0, tried = 0;
  while (both < kCases) {
    ++tried;
    Network m = g.network(g.subset({"a", "b"}, 1), {"p", "q", "r", "t"});
    Network n = g.network(g.subset({"p", "q"}, 1), {"r", "s", "t", "a"});
    Network p = g.network(g.subset({"r", "s"}, 1), {"t", "u", "b"});
    REQUIRE(well_formed(m));
    REQUIRE(well_formed(n));
    REQUIRE(well_formed(p));
    auto mn = extend(m, n);
    auto np = extend(n, p);
    if (mn) CHECK(well_formed(*mn));
    if (np) CHECK(well_formed(*np));
    std::optional<Network> left, right;
    if (mn) left = extend(*mn, p);
    if (np) right = extend(m, *np);
    if (left) CHECK(well_formed(*left));
    if (right) CHECK(well_formed(*right));
    if (left && right) {
      ++both;
      CHECK(same_graph_and_system(*left, *right));
    }
  }
  CHECK(tried > both);
}

TEST_CASE("decomposition followed by extension restores the network") {
  Gen g(404);
  for (int c = 0; c < kCases; ++c) {
    Network m = g.network(g.subset({"a", "b", "c"}, 1), {"x", "y", "z"});
    auto d = decompose(m);
    REQUIRE(d);
    CHECK(d->second.nodes().size() == 1);
    CHECK(well_formed(d->second));
    auto back = extend(d->first, d->second);
    REQUIRE(back);
    CHECK(same_graph_and_system(*back, m));
  }
}

TEST_CASE("closure does not change results") {
  Gen g(505);
  for (int c = 0; c < kCases; ++c) {
    Network m = g.network(g.subset({"a", "b", "c"}, 2), {"x", "y"});
    Network cl = closure(m);
    ResultBounds r = result_bounds(m), s = result_bounds(cl);
    CHECK(std::abs(r.sup - s.sup) <= 2 * r.tolerance);
    CHECK(std::abs(r.inf - s.inf) <= 2 * r.tolerance);

    // tau and output moves of m are exactly the internal moves of its closure
    std::vector<SystemDist> visible, closed;
    auto push = [](std::vector<SystemDist>& v, const SystemDist& d) {
      for (const auto& e : v)
        if (same_dist(e, d)) return;
      v.push_back(d);
    };
    for (const auto& st : ext_steps(m, Alphabet{})) {
      CHECK(st.act.kind != ExtAction::Kind::In);
      push(visible, st.target);
    }
    for (const auto& st : ext_steps(cl, small_alphabet(cl))) {
      CHECK(st.act.kind == ExtAction::Kind::Tau);
      push(closed, st.target);
    }
    CHECK(visible.size() == closed.size());
    for (const auto& d : visible) {
      bool found = false;
      for (const auto& e : closed) found = found || same_dist(d, e);
      CHECK(found);
    }
  }
}

TEST_CASE("transition targets keep the node set") {
  Gen g(606);
  for (int c = 0; c < kCases; ++c) {
    Network m = g.network(g.subset({"a", "b", "c"}, 1), {"x", "y"});
    Plts p = build_plts({m}, small_alphabet(m));
    for (std::size_t s = 0; s < p.size(); ++s) {
      CHECK(p.systems[s].names() == m.nodes());
      for (const auto& t : p.trans[s]) {
        double mass = 0;
        for (const auto& [u, w] : t.dist) mass += w;
        CHECK(mass == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("adding or removing outside vertices leaves node transitions alone") {
  Gen g(707);
  for (int c = 0; c < kCases; ++c) {
    Network m = g.network(g.subset({"a", "b"}, 1), {"x", "y"});
    StepSet base = steps_of(m);

    Network wider = m;
    for (const auto& [v, s] : m.system.nodes) {
      if (g.coin(2)) wider.graph.add_edge(v, "z");
      if (g.coin(2)) wider.graph.add_edge("z", v);
    }
    CHECK(same_steps(base, steps_of(wider)));

    Network narrower = m;
    auto ext = m.externals();
    if (!ext.empty()) {
      std::string drop = *ext.begin();
      narrower.graph.vertices.erase(drop);
      for (auto it = narrower.graph.edges.begin(); it != narrower.graph.edges.end();)
        it = (it->first == drop || it->second == drop) ? narrower.graph.edges.erase(it) : std::next(it);
      CHECK(same_steps(base, steps_of(narrower)));
    }

    for (const auto& i : interface(m).in)
      for (const char* ch : {"c", "d"})
        for (int v : {0, 1}) {
          auto a = net_input(m, i, ch, Value::integer(v));
          auto b = net_input(wider, i, ch, Value::integer(v));
          REQUIRE(a.size() == b.size());
          for (std::size_t k = 0; k < a.size(); ++k) CHECK(same_dist(a[k], b[k]));
        }
  }
}

TEST_CASE("composite steps recombine from the steps of the parts") {
  Gen g(808);
  for (int c = 0; c < kCases; ++c) {
    Network m = g.network(g.subset({"a", "b"}, 1), {"gen", "x"});
    Network gen = g.network({"gen"}, {"x", "y"});
    auto whole = extend(m, gen);
    REQUIRE(whole);

    // The generator listens through the edges m draws into it.
    Network gen_view = gen;
    for (const auto& [a, b] : m.graph.edges)
      if (b == "gen") gen_view.graph.add_edge(a, b);

    StepSet expect;
    SystemDist m_here = SystemDist::point(m.system), g_here = SystemDist::point(gen.system);
    for (const auto& st : net_steps(m)) {
      if (st.act.kind == NetAction::Kind::Tau) {
        add_unique(expect, st.act, product(st.target, g_here));
        continue;
      }
      for (const auto& r : net_input(gen_view, st.act.node, st.act.chan, st.act.value))
        add_unique(expect, st.act, product(st.target, r));
    }
    for (const auto& st : net_steps(gen)) {
      if (st.act.kind == NetAction::Kind::Tau) {
        add_unique(expect, st.act, product(m_here, st.target));
        continue;
      }
      for (const auto& r : net_input(m, "gen", st.act.chan, st.act.value)) add_unique(expect, st.act, product(r, st.target));
    }
    CHECK(same_steps(expect, steps_of(*whole)));
  }
}

TEST_CASE("simulations never contradict testing") {
  Gen g(909);
  g.allow_omega = false;
  int related_may = 0, related_must = 0, refuted = 0;
  for (int c = 0; c < kCases; ++c) {
    Network m = g.network(g.subset({"a", "b"}, 1), {"x", "y"});
    Network n = m;
    if (c % 2 == 0) {
      // n may additionally behave like a fresh random state at one node
      const auto& [node, s] = m.system.nodes[static_cast<std::size_t>(g.pick(static_cast<int>(m.system.nodes.size())))];
      n.system = n.system.with(node, mk::sum(s, g.state(2, 0)));
    } else {
      for (auto& [node, s] : n.system.nodes)
        if (g.coin(2)) s = g.state(2, 0);
    }
    Alphabet alpha = small_alphabet(m);
    auto tests = generate_tests({m, n}, 4, static_cast<std::uint64_t>(c));

    auto sim = sim_check(m, n, &alpha);
    REQUIRE_FALSE(sim.interface_mismatch);
    if (sim.related) {
      ++related_may;
      auto r = refute(m, n, tests, TestMode::May);
      CHECK_FALSE(r.has_value());
    } else if (refute(m, n, tests, TestMode::May)) {
      ++refuted;
    }
    auto dsim = dfdsim_check(m, n, &alpha);
    if (dsim.related) {
      ++related_must;
      auto r = refute(n, m, tests, TestMode::Must);
      CHECK_FALSE(r.has_value());
    }
  }
  CHECK(related_may >= 50);
  CHECK(related_must >= 20);
  // the generated tests do tell some unrelated pairs apart
  CHECK(refuted >= 10);
  MESSAGE("sim related " << related_may << ", dfdsim related " << related_must << ", refuted " << refuted);
}
