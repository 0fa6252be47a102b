#include "wnet/testing.hpp"

#include <map>
#include <random>

#include "wnet/compose.hpp"

namespace wnet {

Mdp reduction_mdp(const Network& n, std::size_t bound) {
  Mdp m;
  std::map<System, int> index;
  std::vector<System> systems;
  std::vector<int> work;
  auto intern = [&](const System& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    if (systems.size() >= bound) throw StateSpaceExceeded(bound);
    int id = static_cast<int>(systems.size());
    index.emplace(s, id);
    systems.push_back(s);
    m.actions.emplace_back();
    m.goal.push_back(0);
    work.push_back(id);
    return id;
  };
  m.root = intern(n.system);
  while (!work.empty()) {
    int s = work.back();
    work.pop_back();
    Network cur = n.with_system(systems[static_cast<std::size_t>(s)]);
    if (omega_pred(cur)) {
      m.goal[static_cast<std::size_t>(s)] = 1;
      continue;
    }
    std::vector<Mdp::Dist> acts;
    for (const auto& d : reduce(cur)) {
      Mdp::Dist dist;
      for (const auto& [sys, w] : d) dist.emplace_back(intern(sys), w);
      acts.push_back(std::move(dist));
    }
    m.actions[static_cast<std::size_t>(s)] = std::move(acts);
  }
  return m;
}

namespace {

double sweep(const Mdp& m, const std::vector<double>& x, std::vector<double>& y, bool maximize) {
  double delta = 0;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (m.goal[s]) {
      y[s] = 1.0;
      continue;
    }
    const auto& acts = m.actions[s];
    if (acts.empty()) {
      y[s] = 0.0;
      continue;
    }
    double best = maximize ? 0.0 : 1.0;
    for (const auto& a : acts) {
      double v = 0;
      for (const auto& [t, p] : a) v += p * x[static_cast<std::size_t>(t)];
      best = maximize ? std::max(best, v) : std::min(best, v);
    }
    y[s] = best;
    delta = std::max(delta, std::abs(best - x[s]));
  }
  return delta;
}

std::vector<double> start_values(const Mdp& m) {
  std::vector<double> x(m.size(), 0.0);
  for (std::size_t s = 0; s < m.size(); ++s) x[s] = m.goal[s] ? 1.0 : 0.0;
  return x;
}

}  // namespace

std::vector<double> value_sweeps(const Mdp& m, int k, bool maximize) {
  std::vector<double> x = start_values(m), y(m.size());
  for (int i = 0; i < k; ++i) {
    sweep(m, x, y, maximize);
    x.swap(y);
  }
  return x;
}

ReachResult reach_values(const Mdp& m, bool maximize, double tol, long max_iter) {
  ReachResult r;
  std::vector<double> x = start_values(m), y(m.size());
  for (long i = 0; i < max_iter; ++i) {
    double delta = sweep(m, x, y, maximize);
    x.swap(y);
    r.iterations = i + 1;
    if (delta <= tol * 0.1) {
      r.values = std::move(x);
      return r;
    }
  }
  throw NonConvergedIteration(max_iter);
}

double value(const SystemDist& d, const DefEnv& defs) {
  double v = 0;
  for (const auto& [sys, w] : d) {
    bool ok = false;
    for (const auto& [n, s] : sys.nodes) ok = ok || state_omega(s, defs);
    if (ok) v += w;
  }
  return v;
}

ResultBounds result_bounds(const Network& n, double tol, long max_iter, std::size_t bound) {
  Mdp m = reduction_mdp(n, bound);
  ResultBounds b;
  b.tolerance = tol;
  b.states = m.size();
  auto hi = reach_values(m, true, tol, max_iter);
  auto lo = reach_values(m, false, tol, max_iter);
  b.sup = hi.values[static_cast<std::size_t>(m.root)];
  b.inf = lo.values[static_cast<std::size_t>(m.root)];
  b.iterations = std::max(hi.iterations, lo.iterations);
  return b;
}

bool compare_results(const ResultBounds& a, const ResultBounds& b, Preorder mode) {
  double tol = std::max(a.tolerance, b.tolerance);
  if (mode == Preorder::Hoare) return a.sup <= b.sup + tol;
  return a.inf <= b.inf + tol;
}

std::optional<Refutation> refute(const Network& m, const Network& n, const std::vector<Network>& tests, TestMode mode,
                                 double tol, RefuteStats* stats) {
  RefuteStats local;
  RefuteStats& st = stats ? *stats : local;
  if (!(interface(m) == interface(n))) {
    Refutation r;
    r.reason = "interface";
    return r;
  }
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (!well_formed(tests[i])) {
      ++st.skipped;
      continue;
    }
    auto a = extend(m, tests[i]);
    auto b = extend(n, tests[i]);
    if (!a || !b) {
      ++st.skipped;
      continue;
    }
    ++st.run;
    ResultBounds ra = result_bounds(*a, tol);
    ResultBounds rb = result_bounds(*b, tol);
    bool ok = compare_results(ra, rb, mode == TestMode::May ? Preorder::Hoare : Preorder::Smith);
    if (!ok) {
      Refutation r;
      r.reason = "test";
      r.test_index = static_cast<int>(i);
      r.left = ra;
      r.right = rb;
      return r;
    }
  }
  return std::nullopt;
}

namespace {

void scan_code(TermRef t, std::set<std::string>& chans, std::set<Value>& vals) {
  if (t->kind == TermKind::Recv || t->kind == TermKind::Bcast) chans.insert(t->name);
  if (t->kind == TermKind::Lit) vals.insert(t->lit);
  for (auto* k : t->kids) scan_code(k, chans, vals);
}

struct TestGen {
  std::mt19937_64 rng;
  std::vector<std::string> chans;
  std::vector<Value> vals;

  int pick(int n) { return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng)); }

  TermRef expr(int bound) {
    if (bound > 0 && pick(2) == 0) return mk::var(pick(bound));
    return mk::lit(vals[static_cast<std::size_t>(pick(static_cast<int>(vals.size())))]);
  }

  TermRef proc(int depth, int bound) {
    if (depth > 0 && pick(4) == 0) {
      static const double ps[] = {0.25, 0.5, 0.75};
      return mk::choice(state(depth - 1, bound), ps[pick(3)], state(depth - 1, bound));
    }
    return mk::proc(state(depth, bound));
  }

  TermRef state(int depth, int bound) {
    const std::string& c = chans[static_cast<std::size_t>(pick(static_cast<int>(chans.size())))];
    if (depth == 0) {
      switch (pick(3)) {
        case 0: return mk::omega();
        case 1: return mk::nil();
        default: return mk::bcast(c, expr(bound), mk::nil());
      }
    }
    switch (pick(8)) {
      case 0: return mk::omega();
      case 1: return mk::nil();
      case 2:
      case 3: return mk::recv(c, "x" + std::to_string(bound), proc(depth - 1, bound + 1));
      case 4: return mk::bcast(c, expr(bound), proc(depth - 1, bound));
      case 5: return mk::tau(proc(depth - 1, bound));
      case 6: return mk::sum(state(depth - 1, bound), state(depth - 1, bound));
      default:
        return mk::match(mk::bin(BinOp::Eq, expr(bound), expr(bound)), state(depth - 1, bound), state(depth - 1, bound));
    }
  }
};

}  // namespace

std::vector<Network> generate_tests(const std::vector<Network>& subjects, int count, std::uint64_t seed) {
  std::set<std::string> iface, chans;
  std::set<Value> vals = {Value::integer(0)};
  for (const auto& s : subjects) {
    Interface io = interface(s);
    iface.insert(io.in.begin(), io.in.end());
    iface.insert(io.out.begin(), io.out.end());
    for (const auto& [n, t] : s.system.nodes) scan_code(t, chans, vals);
    for (const auto& [name, d] : s.defs->all()) scan_code(d.body, chans, vals);
  }
  std::string obs = "obs";
  for (const auto& s : subjects)
    while (s.graph.vertices.count(obs)) obs += "_";
  if (chans.empty()) chans.insert("c");
  TestGen g{std::mt19937_64(seed), {chans.begin(), chans.end()}, {vals.begin(), vals.end()}};
  std::vector<std::string> nodes(iface.begin(), iface.end());
  nodes.push_back(obs);
  std::vector<Network> out;
  for (int t = 0; t < count; ++t) {
    Network n;
    for (const auto& v : nodes) n.graph.add_vertex(v);
    for (const auto& a : nodes)
      for (const auto& b : nodes)
        if (a != b && g.pick(2) == 0) n.graph.add_edge(a, b);
    SystemTerm st = SystemTerm::nil();
    for (const auto& v : nodes) {
      TermRef code = g.state(2, 0);
      while (state_omega(code, *n.defs)) code = g.state(2, 0);
      st = SystemTerm::par(st, SystemTerm::located(v, code));
    }
    n.system = flatten(st);
    out.push_back(std::move(n));
  }
  return out;
}

}  // namespace wnet
