#include "wnet/intensional.hpp"

#include "env_cache.hpp"

namespace wnet {

namespace {

constexpr int kMaxUnfold = 10000;

StateDist normalized(const StateDist& d) {
  StateDist out;
  for (const auto& [s, w] : d) out.add(normalize(s), w);
  return out;
}

bool same_state_dist(const StateDist& a, const StateDist& b) { return a.entries() == b.entries(); }

void push_step(std::vector<StateStep>& out, StateStep st) {
  for (const auto& e : out)
    if (e.act == st.act && same_state_dist(e.target, st.target)) return;
  out.push_back(std::move(st));
}

void collect_steps(TermRef s, const DefEnv& defs, std::vector<StateStep>& out, int depth) {
  if (depth > kMaxUnfold) throw std::runtime_error("unguarded recursion while unfolding definitions");
  switch (s->kind) {
    case TermKind::Bcast: {
      Value v = eval(s->kids[0]);
      push_step(out, {{StateAction::Kind::Out, s->name, v}, normalized(interpret(s->kids[1]))});
      break;
    }
    case TermKind::Tau: push_step(out, {{StateAction::Kind::Tau, {}, {}}, normalized(interpret(s->kids[0]))}); break;
    case TermKind::Sum:
      collect_steps(s->kids[0], defs, out, depth);
      collect_steps(s->kids[1], defs, out, depth);
      break;
    case TermKind::Match:
      collect_steps(eval(s->kids[0]).truth() ? s->kids[1] : s->kids[2], defs, out, depth);
      break;
    case TermKind::Call: collect_steps(defs.unfold(s), defs, out, depth + 1); break;
    default: break;
  }
}

void collect_receives(TermRef s, const std::string& chan, const Value& v, const DefEnv& defs, std::vector<StateDist>& out,
                      int depth) {
  if (depth > kMaxUnfold) throw std::runtime_error("unguarded recursion while unfolding definitions");
  switch (s->kind) {
    case TermKind::Recv:
      if (s->name == chan) {
        StateDist d = normalized(interpret(subst(s->kids[0], {v})));
        for (const auto& e : out)
          if (same_state_dist(e, d)) return;
        out.push_back(std::move(d));
      }
      break;
    case TermKind::Sum:
      collect_receives(s->kids[0], chan, v, defs, out, depth);
      collect_receives(s->kids[1], chan, v, defs, out, depth);
      break;
    case TermKind::Match:
      collect_receives(eval(s->kids[0]).truth() ? s->kids[1] : s->kids[2], chan, v, defs, out, depth);
      break;
    case TermKind::Call: collect_receives(defs.unfold(s), chan, v, defs, out, depth + 1); break;
    default: break;
  }
}

bool omega_at(TermRef s, const DefEnv& defs, int depth) {
  if (depth > kMaxUnfold) throw std::runtime_error("unguarded recursion while unfolding definitions");
  switch (s->kind) {
    case TermKind::Omega: return true;
    case TermKind::Sum: return omega_at(s->kids[0], defs, depth) || omega_at(s->kids[1], defs, depth);
    case TermKind::Match: return omega_at(eval(s->kids[0]).truth() ? s->kids[1] : s->kids[2], defs, depth);
    case TermKind::Call: return omega_at(defs.unfold(s), defs, depth + 1);
    default: return false;
  }
}

// Replaces node n by each state of d, weighting multiplicatively.
SystemDist place(const SystemDist& base, const std::string& n, const StateDist& d) {
  SystemDist out;
  for (const auto& [sys, w] : base)
    for (const auto& [s, p] : d) out.add(sys.with(n, s), w * p);
  return out;
}

// Responses of every node other than `from` to a broadcast c!v emitted at `from`.
std::vector<SystemDist> respond(const Network& net, const SystemDist& start, const std::string& from, const std::string& chan,
                                const Value& v) {
  std::vector<SystemDist> acc{start};
  for (const auto& [n, s] : net.system.nodes) {
    if (n == from || !net.graph.has_edge(from, n)) continue;
    auto recs = state_receives(s, chan, v, *net.defs);
    if (recs.empty()) continue;
    std::vector<SystemDist> next;
    for (const auto& partial : acc)
      for (const auto& r : recs) next.push_back(place(partial, n, r));
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

bool same_dist(const SystemDist& a, const SystemDist& b) { return a.entries() == b.entries(); }

std::vector<StateStep> state_steps(TermRef s, const DefEnv& defs) {
  auto& c = defs.cache();
  {
    std::lock_guard<std::recursive_mutex> lock(c.mu);
    auto it = c.steps.find(s->id);
    if (it != c.steps.end()) return it->second;
  }
  std::vector<StateStep> out;
  collect_steps(s, defs, out, 0);
  std::lock_guard<std::recursive_mutex> lock(c.mu);
  c.steps.emplace(s->id, out);
  return out;
}

std::vector<StateDist> state_receives(TermRef s, const std::string& chan, const Value& v, const DefEnv& defs) {
  auto& c = defs.cache();
  auto key = std::make_tuple(s->id, chan, v);
  {
    std::lock_guard<std::recursive_mutex> lock(c.mu);
    auto it = c.receives.find(key);
    if (it != c.receives.end()) return it->second;
  }
  std::vector<StateDist> out;
  collect_receives(s, chan, v, defs, out, 0);
  std::lock_guard<std::recursive_mutex> lock(c.mu);
  c.receives.emplace(key, out);
  return out;
}

bool state_omega(TermRef s, const DefEnv& defs) {
  auto& c = defs.cache();
  {
    std::lock_guard<std::recursive_mutex> lock(c.mu);
    auto it = c.omega.find(s->id);
    if (it != c.omega.end()) return it->second;
  }
  bool r = omega_at(s, defs, 0);
  std::lock_guard<std::recursive_mutex> lock(c.mu);
  c.omega.emplace(s->id, r);
  return r;
}

std::vector<NetStep> net_steps(const Network& net) {
  std::vector<NetStep> out;
  auto push = [&](NetStep st) {
    for (const auto& e : out)
      if (e.act == st.act && same_dist(e.target, st.target)) return;
    out.push_back(std::move(st));
  };
  SystemDist self = SystemDist::point(net.system);
  for (const auto& [m, s] : net.system.nodes) {
    for (const auto& st : state_steps(s, *net.defs)) {
      SystemDist moved = place(self, m, st.target);
      if (st.act.kind == StateAction::Kind::Tau) {
        push({{NetAction::Kind::Tau, m, {}, {}}, std::move(moved)});
        continue;
      }
      for (auto& d : respond(net, moved, m, st.act.chan, st.act.value))
        push({{NetAction::Kind::Out, m, st.act.chan, st.act.value}, std::move(d)});
    }
  }
  return out;
}

std::vector<SystemDist> net_input(const Network& net, const std::string& from, const std::string& chan, const Value& v) {
  if (net.system.at(from)) throw SourceIsInternal(from);
  auto all = respond(net, SystemDist::point(net.system), from, chan, v);
  std::vector<SystemDist> out;
  for (auto& d : all) {
    bool dup = false;
    for (const auto& e : out) dup = dup || same_dist(e, d);
    if (!dup) out.push_back(std::move(d));
  }
  return out;
}

bool omega_pred(const Network& net) {
  for (const auto& [n, s] : net.system.nodes)
    if (state_omega(s, *net.defs)) return true;
  return false;
}

std::vector<SystemDist> reduce(const Network& net) {
  std::vector<SystemDist> out;
  for (auto& st : net_steps(net)) {
    bool dup = false;
    for (const auto& e : out) dup = dup || same_dist(e, st.target);
    if (!dup) out.push_back(std::move(st.target));
  }
  return out;
}

}  // namespace wnet
