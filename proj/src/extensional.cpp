#include "wnet/extensional.hpp"

#include "json.hpp"
#include <sstream>

#include "wnet/dsl.hpp"

namespace wnet {

std::string ExtAction::label() const {
  switch (kind) {
    case Kind::Tau: return "tau";
    case Kind::In: return "in " + node + "." + chan + "?" + value.str();
    case Kind::Out: {
      std::string s = "out " + chan + "!" + value.str() + ">{";
      bool first = true;
      for (const auto& n : eta) {
        if (!first) s += ",";
        s += n;
        first = false;
      }
      return s + "}";
    }
  }
  return {};
}

namespace {

void scan_term(TermRef t, std::set<std::string>& chans, std::set<Value>& sent, std::int64_t& max_int) {
  if (t->kind == TermKind::Lit && t->lit.is_int()) max_int = std::max(max_int, t->lit.num);
  if (t->kind == TermKind::Recv) chans.insert(t->name);
  if (t->kind == TermKind::Bcast) {
    TermRef e = normalize(t->kids[0]);
    if (e->kind == TermKind::Lit) sent.insert(e->lit);
  }
  for (auto* k : t->kids) scan_term(k, chans, sent, max_int);
}

}  // namespace

Alphabet default_alphabet(const std::vector<Network>& nets) {
  Alphabet a;
  a.defaulted = true;
  std::set<Value> sent;
  std::int64_t max_int = 0;
  std::set<std::string> inputs;
  for (const auto& n : nets) {
    for (const auto& [v, s] : n.system.nodes) scan_term(s, a.channels, sent, max_int);
    for (const auto& [name, d] : n.defs->all()) scan_term(d.body, a.channels, sent, max_int);
    for (const auto& i : interface(n).in) inputs.insert(i);
  }
  std::int64_t fresh = max_int + 1;
  for (const auto& i : inputs) {
    auto vals = sent;
    vals.insert(Value::integer(fresh++));
    a.values[i] = vals;
  }
  return a;
}

std::vector<ExtStep> ext_steps(const Network& n, const Alphabet& alphabet) {
  std::vector<ExtStep> out;
  if (omega_pred(n)) return out;
  Interface io = interface(n);
  for (auto& st : net_steps(n)) {
    if (st.act.kind == NetAction::Kind::Tau) {
      out.push_back({ExtAction::tau(), std::move(st.target)});
      continue;
    }
    std::set<std::string> eta;
    for (const auto& o : n.graph.successors(st.act.node))
      if (io.out.count(o)) eta.insert(o);
    if (eta.empty()) {
      out.push_back({ExtAction::tau(), std::move(st.target)});
    } else {
      out.push_back({ExtAction::out(st.act.chan, st.act.value, std::move(eta)), std::move(st.target)});
    }
  }
  for (const auto& i : io.in) {
    auto it = alphabet.values.find(i);
    if (it == alphabet.values.end()) continue;
    for (const auto& c : alphabet.channels)
      for (const auto& v : it->second)
        for (auto& d : net_input(n, i, c, v)) out.push_back({ExtAction::in(i, c, v), std::move(d)});
  }
  std::vector<ExtStep> uniq;
  for (auto& s : out) {
    bool dup = false;
    for (const auto& u : uniq) dup = dup || (u.act == s.act && same_dist(u.target, s.target));
    if (!dup) uniq.push_back(std::move(s));
  }
  return uniq;
}

bool deadlocked(const Network& n) { return !omega_pred(n) && net_steps(n).empty(); }

Network Plts::network(int s) const {
  const Group& g = groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(s)])];
  Network n;
  n.graph = g.graph;
  n.defs = g.defs;
  n.system = systems[static_cast<std::size_t>(s)];
  return n;
}

Plts build_plts(const std::vector<Network>& roots, const Alphabet& alphabet, std::size_t bound) {
  Plts p;
  p.alphabet = alphabet;
  std::map<std::pair<int, System>, int> index;
  std::vector<int> work;
  auto intern = [&](int g, const System& s) {
    auto key = std::make_pair(g, s);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (p.systems.size() >= bound) throw StateSpaceExceeded(bound);
    int id = static_cast<int>(p.systems.size());
    index.emplace(std::move(key), id);
    p.systems.push_back(s);
    p.group_of.push_back(g);
    p.trans.emplace_back();
    p.omega.push_back(0);
    p.deadlock.push_back(0);
    work.push_back(id);
    return id;
  };
  for (const auto& r : roots) {
    int g = -1;
    for (std::size_t i = 0; i < p.groups.size(); ++i)
      if (p.groups[i].graph == r.graph && p.groups[i].defs == r.defs) g = static_cast<int>(i);
    if (g < 0) {
      g = static_cast<int>(p.groups.size());
      p.groups.push_back({r.graph, r.defs, interface(r)});
    }
    p.roots.push_back(intern(g, r.system));
  }
  while (!work.empty()) {
    int s = work.back();
    work.pop_back();
    Network n = p.network(s);
    p.omega[static_cast<std::size_t>(s)] = omega_pred(n);
    p.deadlock[static_cast<std::size_t>(s)] = !p.omega[static_cast<std::size_t>(s)] && net_steps(n).empty();
    std::vector<Plts::Trans> ts;
    for (auto& st : ext_steps(n, alphabet)) {
      Plts::Trans t;
      t.act = st.act;
      for (const auto& [sys, w] : st.target) t.dist.emplace_back(intern(p.group_of[static_cast<std::size_t>(s)], sys), w);
      ts.push_back(std::move(t));
    }
    p.trans[static_cast<std::size_t>(s)] = std::move(ts);
  }
  return p;
}

std::vector<char> divergent_states(const Plts& p) {
  std::vector<char> in(p.size(), 0);
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p.omega[s]) continue;
    for (const auto& t : p.trans[s])
      if (t.act.kind == ExtAction::Kind::Tau) in[s] = 1;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < p.size(); ++s) {
      if (!in[s]) continue;
      bool keep = false;
      for (const auto& t : p.trans[s]) {
        if (t.act.kind != ExtAction::Kind::Tau) continue;
        bool inside = true;
        for (const auto& [x, w] : t.dist) inside = inside && in[static_cast<std::size_t>(x)];
        if (inside) {
          keep = true;
          break;
        }
      }
      if (!keep) {
        in[s] = 0;
        changed = true;
      }
    }
  }
  return in;
}

bool is_convergent(const Plts& p) {
  for (char c : divergent_states(p))
    if (c) return false;
  return true;
}

std::string to_dot(const Plts& p) {
  std::ostringstream os;
  os << "digraph plts {\n";
  for (std::size_t s = 0; s < p.size(); ++s) {
    std::string label = print_system(p.systems[s]);
    std::string esc;
    for (char ch : label) {
      if (ch == '"' || ch == '\\') esc.push_back('\\');
      esc.push_back(ch);
    }
    os << "  s" << s << " [label=\"" << s << ": " << esc << "\"";
    if (p.omega[s]) os << ", peripheries=2";
    if (p.deadlock[s]) os << ", style=dashed";
    os << "];\n";
  }
  int aux = 0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    for (const auto& t : p.trans[s]) {
      if (t.dist.size() == 1) {
        os << "  s" << s << " -> s" << t.dist[0].first << " [label=\"" << t.act.label() << "\"];\n";
        continue;
      }
      os << "  d" << aux << " [shape=point];\n";
      os << "  s" << s << " -> d" << aux << " [label=\"" << t.act.label() << "\"];\n";
      for (const auto& [x, w] : t.dist) os << "  d" << aux << " -> s" << x << " [label=\"" << w << "\", style=dotted];\n";
      ++aux;
    }
  }
  os << "}\n";
  return os.str();
}

std::string to_json(const Plts& p) {
  nlohmann::json j;
  j["schema"] = 1;
  j["roots"] = p.roots;
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t s = 0; s < p.size(); ++s) {
    nlohmann::json st;
    st["id"] = s;
    st["system"] = print_system(p.systems[s]);
    st["omega"] = static_cast<bool>(p.omega[s]);
    st["deadlock"] = static_cast<bool>(p.deadlock[s]);
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& t : p.trans[s]) {
      nlohmann::json tj;
      tj["label"] = t.act.label();
      nlohmann::json d = nlohmann::json::array();
      for (const auto& [x, w] : t.dist) d.push_back({{"state", x}, {"p", w}});
      tj["target"] = d;
      ts.push_back(tj);
    }
    st["transitions"] = ts;
    states.push_back(st);
  }
  j["states"] = states;
  return j.dump(2);
}

}  // namespace wnet
