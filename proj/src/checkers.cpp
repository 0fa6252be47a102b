#include "wnet/checkers.hpp"

#include <map>
#include <memory>

namespace wnet {

namespace {

constexpr std::size_t kMaxEta = 8;

// Product of a state space with the progress of a weak action. Phase 0..nphase-1;
// node = local * nphase + phase.
struct PhaseGraph {
  ExtAction lambda;
  int nphase = 1;
  int final_phase = 0;
  std::vector<int> starts;
  std::vector<int> states;
  std::vector<int> local;
  std::vector<std::vector<int>> acts_of;
  std::vector<IndexDist> act_succ;
  std::vector<int> act_src;
  std::vector<std::vector<int>> pred_acts;

  std::size_t nodes() const { return states.size() * static_cast<std::size_t>(nphase); }
  int node(int li, int ph) const { return li * nphase + ph; }
  int state_of(int u) const { return states[static_cast<std::size_t>(u / nphase)]; }
  int phase_of(int u) const { return u % nphase; }
};

std::optional<int> phase_step(const PhaseGraph& g, int ph, const ExtAction& a, const std::vector<std::string>& eta) {
  const ExtAction& l = g.lambda;
  if (l.kind == ExtAction::Kind::Tau) return std::nullopt;
  if (l.kind == ExtAction::Kind::In) {
    if (ph == 0 && a == l) return 1;
    return std::nullopt;
  }
  if (a.kind != ExtAction::Kind::Out || a.chan != l.chan || a.value != l.value) return std::nullopt;
  int mask = 0;
  for (const auto& o : a.eta) {
    auto it = std::find(eta.begin(), eta.end(), o);
    if (it == eta.end()) return std::nullopt;
    mask |= 1 << (it - eta.begin());
  }
  if (mask == 0) return std::nullopt;
  int full = (1 << eta.size()) - 1;
  int base = 1 << eta.size();
  if (ph < base) {
    if (mask == ph) return base + mask;
    return std::nullopt;
  }
  int covered = ph - base;
  if (covered == full || (mask & covered)) return std::nullopt;
  return base + (covered | mask);
}

std::unique_ptr<PhaseGraph> build_phase_graph(const Plts& p, const std::vector<int>& states, const ExtAction& lambda) {
  auto g = std::make_unique<PhaseGraph>();
  g->lambda = lambda;
  g->states = states;
  g->local.assign(p.size(), -1);
  for (std::size_t i = 0; i < states.size(); ++i) g->local[static_cast<std::size_t>(states[i])] = static_cast<int>(i);
  std::vector<std::string> eta(lambda.eta.begin(), lambda.eta.end());
  switch (lambda.kind) {
    case ExtAction::Kind::Tau:
      g->nphase = 1;
      g->final_phase = 0;
      g->starts = {0};
      break;
    case ExtAction::Kind::In:
      g->nphase = 2;
      g->final_phase = 1;
      g->starts = {0};
      break;
    case ExtAction::Kind::Out: {
      if (eta.size() > kMaxEta) throw std::runtime_error("too many listening output nodes for a weak output");
      int base = 1 << eta.size();
      g->nphase = 2 * base;
      g->final_phase = base + base - 1;
      for (int b = 1; b < base; ++b) g->starts.push_back(b);
      break;
    }
  }
  std::size_t n = g->nodes();
  g->acts_of.assign(n, {});
  g->pred_acts.assign(n, {});
  for (std::size_t li = 0; li < states.size(); ++li) {
    const auto& ts = p.trans[static_cast<std::size_t>(states[li])];
    for (int ph = 0; ph < g->nphase; ++ph) {
      int u = g->node(static_cast<int>(li), ph);
      for (const auto& t : ts) {
        int next = ph;
        if (t.act.kind != ExtAction::Kind::Tau) {
          auto s = phase_step(*g, ph, t.act, eta);
          if (!s) continue;
          next = *s;
        }
        IndexDist succ;
        bool inside = true;
        for (const auto& [x, w] : t.dist) {
          int lx = g->local[static_cast<std::size_t>(x)];
          if (lx < 0) {
            inside = false;
            break;
          }
          succ.emplace_back(g->node(lx, next), w);
        }
        if (!inside) throw std::logic_error("phase graph state set is not closed");
        int id = static_cast<int>(g->act_succ.size());
        g->act_succ.push_back(std::move(succ));
        g->act_src.push_back(u);
        g->acts_of[static_cast<std::size_t>(u)].push_back(id);
      }
    }
  }
  for (std::size_t a = 0; a < g->act_succ.size(); ++a)
    for (const auto& [v, w] : g->act_succ[a]) g->pred_acts[static_cast<std::size_t>(v)].push_back(static_cast<int>(a));
  return g;
}

// Nodes from which some scheduler reaches `stop` with probability 1.
std::vector<char> almost_sure(const PhaseGraph& g, const std::vector<char>& stop) {
  std::size_t n = g.nodes();
  std::vector<char> in(n, 1), reach(n), safe(g.act_succ.size());
  while (true) {
    for (std::size_t a = 0; a < g.act_succ.size(); ++a) {
      bool ok = true;
      for (const auto& [v, w] : g.act_succ[a]) ok = ok && in[static_cast<std::size_t>(v)];
      safe[a] = ok;
    }
    std::fill(reach.begin(), reach.end(), 0);
    std::vector<int> queue;
    for (std::size_t u = 0; u < n; ++u)
      if (in[u] && stop[u]) {
        reach[u] = 1;
        queue.push_back(static_cast<int>(u));
      }
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      for (int a : g.pred_acts[static_cast<std::size_t>(v)]) {
        auto u = static_cast<std::size_t>(g.act_src[static_cast<std::size_t>(a)]);
        if (!in[u] || reach[u] || !safe[static_cast<std::size_t>(a)]) continue;
        reach[u] = 1;
        queue.push_back(static_cast<int>(u));
      }
    }
    if (reach == in) return in;
    in = reach;
  }
}

std::vector<char> stop_at_final(const PhaseGraph& g, const std::vector<char>& per_local) {
  std::vector<char> stop(g.nodes(), 0);
  for (std::size_t li = 0; li < g.states.size(); ++li)
    if (per_local[li]) stop[static_cast<std::size_t>(g.node(static_cast<int>(li), g.final_phase))] = 1;
  return stop;
}

// Per local state: can it complete the weak action into a full distribution on the goal?
std::vector<char> query_states(const PhaseGraph& g, const std::vector<char>& goal_local) {
  auto as = almost_sure(g, stop_at_final(g, goal_local));
  std::vector<char> out(g.states.size(), 0);
  for (std::size_t li = 0; li < g.states.size(); ++li)
    for (int ph : g.starts)
      if (as[static_cast<std::size_t>(g.node(static_cast<int>(li), ph))]) out[li] = 1;
  return out;
}

// Linear program over occupation measures of the pruned phase graph.
struct FlowLp {
  const PhaseGraph& g;
  std::vector<char> usable;  // nodes kept
  std::vector<char> safe;    // actions kept
  std::vector<int> row_of;   // node -> balance row
  LinearSystem sys;
  std::vector<std::vector<std::pair<int, double>>> balance;
  std::vector<double> balance_rhs;

  explicit FlowLp(const PhaseGraph& pg) : g(pg) {}

  // Keeps the nodes that reach `stop` almost surely and are reachable from the
  // given start nodes. Returns false if some start is lost.
  bool prune(const std::vector<char>& stop, const std::vector<int>& starts) {
    auto as = almost_sure(g, stop);
    safe.assign(g.act_succ.size(), 0);
    for (std::size_t a = 0; a < g.act_succ.size(); ++a) {
      bool ok = as[static_cast<std::size_t>(g.act_src[a])];
      for (const auto& [v, w] : g.act_succ[a]) ok = ok && as[static_cast<std::size_t>(v)];
      safe[a] = ok;
    }
    usable.assign(g.nodes(), 0);
    std::vector<int> work;
    for (int s : starts) {
      if (!as[static_cast<std::size_t>(s)]) return false;
      if (!usable[static_cast<std::size_t>(s)]) {
        usable[static_cast<std::size_t>(s)] = 1;
        work.push_back(s);
      }
    }
    while (!work.empty()) {
      int u = work.back();
      work.pop_back();
      if (stop[static_cast<std::size_t>(u)] && g.acts_of[static_cast<std::size_t>(u)].empty()) continue;
      for (int a : g.acts_of[static_cast<std::size_t>(u)]) {
        if (!safe[static_cast<std::size_t>(a)]) continue;
        for (const auto& [v, w] : g.act_succ[static_cast<std::size_t>(a)]) {
          if (usable[static_cast<std::size_t>(v)]) continue;
          usable[static_cast<std::size_t>(v)] = 1;
          work.push_back(v);
        }
      }
    }
    row_of.assign(g.nodes(), -1);
    for (std::size_t u = 0; u < g.nodes(); ++u)
      if (usable[u]) {
        row_of[u] = static_cast<int>(balance.size());
        balance.emplace_back();
        balance_rhs.push_back(0.0);
      }
    for (std::size_t a = 0; a < g.act_succ.size(); ++a) {
      auto u = static_cast<std::size_t>(g.act_src[a]);
      if (!safe[a] || !usable[u]) continue;
      int x = sys.add_var();
      balance[static_cast<std::size_t>(row_of[u])].emplace_back(x, 1.0);
      for (const auto& [v, w] : g.act_succ[a]) balance[static_cast<std::size_t>(row_of[static_cast<std::size_t>(v)])].emplace_back(x, -w);
    }
    return true;
  }

  // Adds a variable for mass leaving the graph at node u.
  int exit_at(int u) {
    int x = sys.add_var();
    balance[static_cast<std::size_t>(row_of[static_cast<std::size_t>(u)])].emplace_back(x, 1.0);
    return x;
  }

  void source(int u, double mass) { balance_rhs[static_cast<std::size_t>(row_of[static_cast<std::size_t>(u)])] += mass; }

  int source_var(int u) {
    int x = sys.add_var();
    balance[static_cast<std::size_t>(row_of[static_cast<std::size_t>(u)])].emplace_back(x, -1.0);
    return x;
  }

  bool solve() {
    for (std::size_t r = 0; r < balance.size(); ++r) sys.add_row(balance[r], balance_rhs[r]);
    return solve_feasible(sys, global_tolerance()).has_value();
  }
};

// b ==λ==> Θ with target lift Θ, where target_i is related to the goal set rows[i].
bool lp_match(const PhaseGraph& g, int b_local, const std::vector<double>& weights,
              const std::vector<const std::vector<char>*>& rows) {
  std::vector<char> any(g.states.size(), 0);
  for (const auto* r : rows)
    for (std::size_t li = 0; li < any.size(); ++li) any[li] = any[li] || (*r)[li];
  auto stop = stop_at_final(g, any);
  for (int ph : g.starts) {
    FlowLp lp(g);
    int start = g.node(b_local, ph);
    if (!lp.prune(stop, {start})) continue;
    lp.source(start, 1.0);
    std::vector<std::vector<std::pair<int, double>>> class_rows(rows.size());
    for (std::size_t li = 0; li < g.states.size(); ++li) {
      int u = g.node(static_cast<int>(li), g.final_phase);
      if (!lp.usable[static_cast<std::size_t>(u)]) continue;
      for (std::size_t i = 0; i < rows.size(); ++i)
        if ((*rows[i])[li]) class_rows[i].emplace_back(lp.exit_at(u), 1.0);
    }
    bool hopeless = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (class_rows[i].empty() && weights[i] > global_tolerance()) hopeless = true;
      lp.sys.add_row(class_rows[i], weights[i]);
    }
    if (hopeless) continue;
    if (lp.solve()) return true;
  }
  return false;
}

std::vector<int> reachable(const Plts& p, const std::vector<int>& from) {
  std::vector<char> seen(p.size(), 0);
  std::vector<int> work, out;
  for (int s : from)
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      work.push_back(s);
    }
  while (!work.empty()) {
    int s = work.back();
    work.pop_back();
    out.push_back(s);
    for (const auto& t : p.trans[static_cast<std::size_t>(s)])
      for (const auto& [x, w] : t.dist)
        if (!seen[static_cast<std::size_t>(x)]) {
          seen[static_cast<std::size_t>(x)] = 1;
          work.push_back(x);
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

class Engine {
 public:
  Engine(const Plts& p, std::vector<int> responders) : p_(p), states_(std::move(responders)) {
    local_.assign(p.size(), -1);
    for (std::size_t i = 0; i < states_.size(); ++i) local_[static_cast<std::size_t>(states_[i])] = static_cast<int>(i);
  }

  const PhaseGraph& graph(const ExtAction& l) {
    auto it = graphs_.find(l);
    if (it == graphs_.end()) it = graphs_.emplace(l, build_phase_graph(p_, states_, l)).first;
    return *it->second;
  }

  int local(int s) const { return local_[static_cast<std::size_t>(s)]; }
  std::size_t size() const { return states_.size(); }
  const std::vector<int>& states() const { return states_; }

  std::vector<char> indicator(const std::vector<char>& global) const {
    std::vector<char> out(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) out[i] = global[static_cast<std::size_t>(states_[i])];
    return out;
  }

 private:
  const Plts& p_;
  std::vector<int> states_;
  std::vector<int> local_;
  std::map<ExtAction, std::unique_ptr<PhaseGraph>> graphs_;
};

struct Refiner {
  const Plts& p;
  bool deadlock_mode;
  std::vector<int> challengers;
  std::vector<int> chal_local;
  Engine engine;
  std::vector<std::vector<char>> rel;  // [challenger local][responder local]
  std::map<std::pair<ExtAction, int>, std::vector<char>> cache;
  std::vector<char> goal_answers;

  Refiner(const Plts& plts, bool dl, std::vector<int> chal, std::vector<int> resp)
      : p(plts), deadlock_mode(dl), challengers(std::move(chal)), engine(plts, std::move(resp)) {
    chal_local.assign(p.size(), -1);
    for (std::size_t i = 0; i < challengers.size(); ++i) chal_local[static_cast<std::size_t>(challengers[i])] = static_cast<int>(i);
    rel.assign(challengers.size(), std::vector<char>(engine.size(), 1));
    const auto& goal = deadlock_mode ? p.deadlock : p.omega;
    goal_answers = query_states(engine.graph(ExtAction::tau()), engine.indicator(goal));
  }

  const std::vector<char>& point_answers(const ExtAction& l, int target) {
    auto key = std::make_pair(l, target);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const auto& row = rel[static_cast<std::size_t>(chal_local[static_cast<std::size_t>(target)])];
    return cache.emplace(key, query_states(engine.graph(l), row)).first->second;
  }

  bool check(int a, int bl, bool use_lp) {
    auto ua = static_cast<std::size_t>(a);
    if (deadlock_mode ? p.deadlock[ua] : p.omega[ua])
      if (!goal_answers[static_cast<std::size_t>(bl)]) return false;
    for (const auto& t : p.trans[ua]) {
      if (t.dist.size() == 1 && !use_lp) {
        if (!point_answers(t.act, t.dist[0].first)[static_cast<std::size_t>(bl)]) return false;
        continue;
      }
      std::vector<double> weights;
      std::vector<const std::vector<char>*> rows;
      for (const auto& [x, w] : t.dist) {
        weights.push_back(w);
        rows.push_back(&rel[static_cast<std::size_t>(chal_local[static_cast<std::size_t>(x)])]);
      }
      if (!lp_match(engine.graph(t.act), bl, weights, rows)) return false;
    }
    return true;
  }

  long run() {
    long sweeps = 0;
    bool changed = true;
    while (changed) {
      changed = false;
      ++sweeps;
      cache.clear();
      for (std::size_t ai = 0; ai < challengers.size(); ++ai)
        for (std::size_t bl = 0; bl < engine.size(); ++bl) {
          if (!rel[ai][bl]) continue;
          if (!check(challengers[ai], static_cast<int>(bl), false)) {
            rel[ai][bl] = 0;
            changed = true;
          }
        }
    }
    return sweeps;
  }

  // Replays every retained pair; small responder spaces also go through the LP path.
  void audit() {
    cache.clear();
    bool lp = engine.size() <= 200;
    for (std::size_t ai = 0; ai < challengers.size(); ++ai)
      for (std::size_t bl = 0; bl < engine.size(); ++bl)
        if (rel[ai][bl] && !check(challengers[ai], static_cast<int>(bl), lp))
          throw std::logic_error("simulation audit failed at pair (" + std::to_string(challengers[ai]) + ", " +
                                 std::to_string(engine.states()[bl]) + ")");
  }

  SimRelation relation(SimRelation::Kind kind) const {
    SimRelation r;
    r.kind = kind;
    for (std::size_t ai = 0; ai < challengers.size(); ++ai)
      for (std::size_t bl = 0; bl < engine.size(); ++bl)
        if (rel[ai][bl]) r.pairs.emplace(challengers[ai], engine.states()[bl]);
    return r;
  }
};

CheckOutcome run_check(const Network& m, const Network& n, const Alphabet* alphabet, std::size_t bound, bool deadlock_mode) {
  CheckOutcome out;
  if (!well_formed(m) || !well_formed(n)) {
    out.ill_formed = true;
    return out;
  }
  if (!(interface(m) == interface(n))) {
    out.interface_mismatch = true;
    return out;
  }
  Alphabet alpha = alphabet ? *alphabet : default_alphabet({m, n});
  out.plts = build_plts({m, n}, alpha, bound);
  if (deadlock_mode && !is_convergent(out.plts)) throw NotConvergent();
  out.root_m = out.plts.roots[0];
  out.root_n = out.plts.roots[1];
  Refiner r(out.plts, deadlock_mode, reachable(out.plts, {out.root_m}), reachable(out.plts, {out.root_n}));
  out.initial_pairs = r.challengers.size() * r.engine.size();
  out.sweeps = r.run();
  r.audit();
  auto kind = deadlock_mode ? SimRelation::Kind::DfDeadlock : SimRelation::Kind::Simulation;
  out.relation = r.relation(kind);
  out.related = out.relation.contains(out.root_m, out.root_n);
  return out;
}

}  // namespace

bool weak_match(const Plts& p, int s, const ExtAction& lambda, const IndexDist& target, const SimRelation& rel) {
  Engine e(p, reachable(p, {s}));
  std::vector<double> weights;
  std::vector<std::vector<char>> rows;
  for (const auto& [x, w] : target) {
    weights.push_back(w);
    std::vector<char> row(e.size(), 0);
    for (std::size_t i = 0; i < e.size(); ++i) row[i] = rel.contains(x, e.states()[i]);
    rows.push_back(std::move(row));
  }
  std::vector<const std::vector<char>*> ptrs;
  for (const auto& r : rows) ptrs.push_back(&r);
  return lp_match(e.graph(lambda), e.local(s), weights, ptrs);
}

bool weak_tau_to(const Plts& p, int s, const std::vector<char>& goal) {
  Engine e(p, reachable(p, {s}));
  return query_states(e.graph(ExtAction::tau()), e.indicator(goal))[static_cast<std::size_t>(e.local(s))];
}

CheckOutcome sim_check(const Network& m, const Network& n, const Alphabet* alphabet, std::size_t bound) {
  return run_check(m, n, alphabet, bound, false);
}

CheckOutcome dfdsim_check(const Network& m, const Network& n, const Alphabet* alphabet, std::size_t bound) {
  return run_check(m, n, alphabet, bound, true);
}

namespace {

// Θ ==λ==> Θ' where mass may also be lost to divergence, and the strong target
// lifts to Θ' through the candidate rows.
bool dsim_match(const PhaseGraph& g, const std::vector<char>& divergent, const IndexDist& theta,
                const IndexDist& target, const DsimCandidate& cand) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < cand.size(); ++r)
    for (const auto& [x, w] : target)
      if (cand[r].first == x) rows.push_back(r);
  std::vector<char> stop_state(g.states.size(), 0);
  for (auto r : rows)
    for (const auto& [t, w] : cand[r].second) stop_state[static_cast<std::size_t>(g.local[static_cast<std::size_t>(t)])] = 1;
  auto stop = stop_at_final(g, stop_state);
  std::vector<char> sink(g.nodes(), 0);
  for (std::size_t u = 0; u < g.nodes(); ++u)
    if (divergent[static_cast<std::size_t>(g.state_of(static_cast<int>(u)))]) sink[u] = 1;
  std::vector<char> stop_or_sink(g.nodes());
  for (std::size_t u = 0; u < g.nodes(); ++u) stop_or_sink[u] = stop[u] || sink[u];

  FlowLp lp(g);
  std::vector<int> starts;
  auto as = almost_sure(g, stop_or_sink);
  for (const auto& [s, w] : theta) {
    int li = g.local[static_cast<std::size_t>(s)];
    for (int ph : g.starts) {
      int u = g.node(li, ph);
      if (as[static_cast<std::size_t>(u)]) starts.push_back(u);
    }
  }
  if (!lp.prune(stop_or_sink, starts)) return false;
  // mass of each source state may be spread over the possible first output blocks
  for (const auto& [s, w] : theta) {
    int li = g.local[static_cast<std::size_t>(s)];
    std::vector<std::pair<int, double>> split;
    for (int ph : g.starts) {
      int u = g.node(li, ph);
      if (lp.usable[static_cast<std::size_t>(u)] && std::find(starts.begin(), starts.end(), u) != starts.end())
        split.emplace_back(lp.source_var(u), 1.0);
    }
    if (split.empty()) return false;
    lp.sys.add_row(split, w);
  }
  for (std::size_t u = 0; u < g.nodes(); ++u)
    if (lp.usable[u] && sink[u]) lp.exit_at(static_cast<int>(u));
  std::map<int, std::vector<std::pair<int, double>>> by_state;
  for (std::size_t li = 0; li < g.states.size(); ++li) {
    int u = g.node(static_cast<int>(li), g.final_phase);
    if (lp.usable[static_cast<std::size_t>(u)] && stop_state[li]) by_state[g.states[li]].emplace_back(lp.exit_at(u), 1.0);
  }
  std::map<int, std::vector<std::pair<int, double>>> by_left;
  for (auto r : rows) {
    int q = lp.sys.add_var();
    by_left[cand[r].first].emplace_back(q, 1.0);
    for (const auto& [t, w] : cand[r].second) by_state[t].emplace_back(q, -w);
  }
  for (const auto& [x, w] : target) {
    auto it = by_left.find(x);
    if (it == by_left.end()) return false;
    lp.sys.add_row(it->second, w);
  }
  for (auto& [t, row] : by_state) lp.sys.add_row(row, 0.0);
  return lp.solve();
}

bool all_reach(const PhaseGraph& g, const IndexDist& theta, const std::vector<char>& goal_local) {
  auto ok = query_states(g, goal_local);
  for (const auto& [s, w] : theta)
    if (!ok[static_cast<std::size_t>(g.local[static_cast<std::size_t>(s)])]) return false;
  return true;
}

}  // namespace

bool dsim_verify(const Plts& p, const DsimCandidate& candidate) {
  for (const auto& [a, theta] : candidate) {
    if (a < 0 || static_cast<std::size_t>(a) >= p.size()) return false;
    double mass = 0;
    for (const auto& [s, w] : theta) {
      if (s < 0 || static_cast<std::size_t>(s) >= p.size() || w < 0) return false;
      mass += w;
    }
    if (mass > 1.0 + global_tolerance()) return false;
  }
  std::vector<int> all(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) all[i] = static_cast<int>(i);
  Engine e(p, all);
  auto divergent = divergent_states(p);
  std::vector<char> dead_or_div(p.size()), div_only(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    dead_or_div[i] = p.deadlock[i] || divergent[i];
    div_only[i] = divergent[i];
  }
  const auto& tau = e.graph(ExtAction::tau());
  for (const auto& [a, theta] : candidate) {
    auto ua = static_cast<std::size_t>(a);
    if (p.deadlock[ua] && !all_reach(tau, theta, dead_or_div)) return false;
    if (divergent[ua] && !all_reach(tau, theta, div_only)) return false;
    for (const auto& t : p.trans[ua])
      if (!dsim_match(e.graph(t.act), divergent, theta, t.dist, candidate)) return false;
  }
  return true;
}

}  // namespace wnet
