#include "wnet/routing.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <numeric>

#include "json.hpp"

namespace wnet {

void ValueMultiset::remove(std::int64_t v) {
  auto it = counts_.find(v);
  if (it == counts_.end()) return;
  if (--it->second == 0) counts_.erase(it);
}

ValueMultiset ValueMultiset::plus(std::int64_t v) const {
  ValueMultiset r = *this;
  r.add(v);
  return r;
}

ValueMultiset ValueMultiset::minus(std::int64_t v) const {
  ValueMultiset r = *this;
  r.remove(v);
  return r;
}

ValueMultiset ValueMultiset::united(const ValueMultiset& o) const {
  ValueMultiset r = *this;
  for (const auto& [v, n] : o.counts_) r.add(v, n);
  return r;
}

int ValueMultiset::count(std::int64_t v) const {
  auto it = counts_.find(v);
  return it == counts_.end() ? 0 : it->second;
}

int ValueMultiset::size() const {
  int n = 0;
  for (const auto& [v, c] : counts_) n += c;
  return n;
}

std::vector<std::int64_t> ValueMultiset::distinct() const {
  std::vector<std::int64_t> out;
  for (const auto& [v, c] : counts_) out.push_back(v);
  return out;
}

namespace {

std::string value_key(std::int64_t v) { return v < 0 ? "n" + std::to_string(-v) : std::to_string(v); }

}  // namespace

std::string ValueMultiset::key() const {
  if (counts_.empty()) return "e";
  std::string s;
  for (const auto& [v, c] : counts_)
    for (int i = 0; i < c; ++i) {
      if (!s.empty()) s += "_";
      s += value_key(v);
    }
  return s;
}

std::optional<ValueMultiset> ValueMultiset::from_key(const std::string& key) {
  ValueMultiset m;
  if (key == "e") return m;
  std::size_t start = 0;
  while (start <= key.size()) {
    std::size_t end = key.find('_', start);
    std::string part = key.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (part.empty()) return std::nullopt;
    bool neg = part[0] == 'n';
    std::string digits = neg ? part.substr(1) : part;
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    std::int64_t v = std::stoll(digits);
    m.add(neg ? -v : v);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return m;
}

std::vector<ValueMultiset> bags_up_to(const std::vector<std::int64_t>& values, int max_size) {
  std::vector<std::int64_t> vs = values;
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  std::vector<ValueMultiset> out;
  ValueMultiset cur;
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == vs.size()) {
      out.push_back(cur);
      return;
    }
    for (int n = 0; n <= left; ++n) {
      ValueMultiset saved = cur;
      cur.add(vs[i], n);
      rec(i + 1, left - n);
      cur = saved;
    }
  };
  rec(0, std::max(0, max_size));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::int64_t> ProtocolConfig::distinct_values() const {
  std::vector<std::int64_t> vs = values;
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
  return s;
}

}  // namespace

InvalidTopology::InvalidTopology(std::vector<std::string> v)
    : std::runtime_error("invalid topology: " + join(v)), violations(std::move(v)) {}

std::string internal_name(int h) { return "n" + std::to_string(h); }
std::string channel_name(int h) { return "c" + std::to_string(h); }

namespace {

std::vector<int> internal_successors(const ProtocolConfig& cfg, int h) {
  std::vector<int> out;
  for (int g = 1; g <= cfg.j; ++g)
    if (cfg.graph.has_edge(internal_name(h), internal_name(g))) out.push_back(g);
  return out;
}

}  // namespace

ProtocolConfig make_config(int j, const std::vector<std::pair<std::string, std::string>>& edges,
                           std::map<int, std::map<int, double>> lambda, int k, std::vector<std::int64_t> values) {
  ProtocolConfig cfg;
  cfg.j = j;
  cfg.k = k;
  cfg.graph.add_vertex("i");
  cfg.graph.add_vertex("o");
  for (int h = 1; h <= j; ++h) cfg.graph.add_vertex(internal_name(h));
  for (const auto& [a, b] : edges) {
    cfg.graph.add_vertex(a);
    cfg.graph.add_vertex(b);
    cfg.graph.add_edge(a, b);
  }
  cfg.lambda = std::move(lambda);
  for (int h = 1; h <= j; ++h) {
    if (h == 2 || cfg.lambda.count(h)) continue;
    auto succ = internal_successors(cfg, h);
    if (succ.empty()) continue;
    for (int g : succ) cfg.lambda[h][g] = 1.0 / static_cast<double>(succ.size());
  }
  if (values.empty())
    for (int v = 1; v <= k; ++v) values.push_back(v);
  cfg.values = std::move(values);
  return cfg;
}

ProtocolConfig load_topology(const std::string& path, int k, std::vector<std::int64_t> values) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  int nodes = j.at("nodes").get<int>();
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : j.at("edges")) {
    auto a = e.at(0).get<std::string>(), b = e.at(1).get<std::string>();
    edges.emplace_back(a, b);
    if (e.size() > 2 && e.at(2).get<std::string>() == "both") edges.emplace_back(b, a);
  }
  std::map<int, std::map<int, double>> lambda;
  if (j.contains("lambda"))
    for (const auto& [h, row] : j.at("lambda").items())
      for (const auto& [g, p] : row.items()) lambda[std::stoi(h)][std::stoi(g)] = p.get<double>();
  if (values.empty() && j.contains("values")) values = j.at("values").get<std::vector<std::int64_t>>();
  return make_config(nodes, edges, std::move(lambda), k, std::move(values));
}

std::vector<std::string> topology_violations(const ProtocolConfig& cfg) {
  std::vector<std::string> v;
  const Graph& g = cfg.graph;
  if (cfg.j < 2) v.push_back("at least two internal nodes are required");
  std::set<std::string> expect = {"i", "o"};
  for (int h = 1; h <= cfg.j; ++h) expect.insert(internal_name(h));
  if (g.vertices != expect) v.push_back("vertices must be exactly i, o, n1..n" + std::to_string(cfg.j));
  if (!g.predecessors("i").empty() || !g.successors("o").empty())
    v.push_back("i must be the only input node and o the only output node");
  if (g.successors("i") != std::vector<std::string>{"n1"}) v.push_back("i must be connected to n1 and to nothing else");
  if (g.predecessors("o") != std::vector<std::string>{"n2"}) v.push_back("n2 must be the only node connected to o");
  for (const auto& p : g.predecessors("n1"))
    if (p != "i") v.push_back("edge " + p + " -> n1 enters n1");
  for (int h = 1; h <= cfg.j; ++h) {
    std::set<std::string> seen = {internal_name(h)};
    std::vector<std::string> work = {internal_name(h)};
    bool found = h == 2;
    while (!work.empty() && !found) {
      auto x = work.back();
      work.pop_back();
      for (const auto& y : g.successors(x)) {
        if (y == "n2") found = true;
        if (seen.insert(y).second) work.push_back(y);
      }
    }
    if (!found) v.push_back("no path from " + internal_name(h) + " to n2");
  }
  for (int h = 1; h <= cfg.j; ++h) {
    if (h == 2) continue;
    auto succ = internal_successors(cfg, h);
    auto it = cfg.lambda.find(h);
    std::vector<int> supp;
    double total = 0;
    bool bad_weight = false;
    if (it != cfg.lambda.end())
      for (const auto& [t, p] : it->second) {
        if (p > 0) supp.push_back(t);
        if (p < 0) bad_weight = true;
        total += p;
      }
    if (supp != succ) v.push_back("next-hop distribution of " + internal_name(h) + " must be supported on exactly its neighbours");
    if (bad_weight || std::abs(total - 1.0) > 1e-9) v.push_back("next-hop distribution of " + internal_name(h) + " must sum to 1");
  }
  for (const auto& [h, row] : cfg.lambda)
    if (h < 1 || h > cfg.j || h == 2) v.push_back("next-hop row given for unexpected node " + std::to_string(h));
  if (cfg.k < 0) v.push_back("message budget must be non-negative");
  return v;
}

namespace {

TermRef call0(const std::string& name) { return mk::call(name, {}); }

TermRef sum_all(const std::vector<TermRef>& parts) {
  if (parts.empty()) return mk::nil();
  TermRef s = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) s = mk::sum(s, parts[i]);
  return s;
}

// if x = v1 then t1 else if ... else nil, with x the innermost binder
TermRef dispatch(const std::vector<std::int64_t>& values, const std::function<TermRef(std::int64_t)>& target) {
  TermRef s = mk::nil();
  for (auto it = values.rbegin(); it != values.rend(); ++it)
    s = mk::match(mk::bin(BinOp::Eq, mk::var(0), mk::num(*it)), target(*it), s);
  return s;
}

// Binary nesting of a finite distribution over states.
TermRef hop_choice(const std::map<int, double>& row, const std::function<TermRef(int)>& state) {
  std::vector<std::pair<int, double>> entries;
  for (const auto& [h, p] : row)
    if (p > 0) entries.emplace_back(h, p);
  if (entries.empty()) throw std::logic_error("empty next-hop distribution");
  std::function<TermRef(std::size_t, double)> rec = [&](std::size_t i, double rest) -> TermRef {
    if (i + 1 == entries.size()) return mk::proc(state(entries[i].first));
    double p = entries[i].second / rest;
    if (p >= 1.0) return mk::proc(state(entries[i].first));
    return mk::choice(state(entries[i].first), p, rec(i + 1, rest - entries[i].second));
  };
  return rec(0, 1.0);
}

std::string spec_name(int k, const ValueMultiset& a) { return "P" + std::to_string(k) + "_" + a.key(); }
std::string q_name(int k, const ValueMultiset& a, int h) {
  return "Q" + std::to_string(k) + "_" + a.key() + "_to" + std::to_string(h);
}
std::string r_name(const ValueMultiset& a) { return "R_" + a.key(); }
std::string s_name(int h, const ValueMultiset& a, int to) {
  return "S" + std::to_string(h) + "_" + a.key() + "_to" + std::to_string(to);
}

}  // namespace

Network build_spec(int k, const ValueMultiset& a, const std::vector<std::int64_t>& values) {
  std::vector<std::int64_t> vs = values;
  for (auto v : a.distinct()) vs.push_back(v);
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  int cap = k + a.size();
  auto env = std::make_shared<DefEnv>();
  for (int kk = 0; kk <= k; ++kk)
    for (const auto& bag : bags_up_to(vs, cap - kk)) {
      std::vector<TermRef> parts;
      for (auto v : bag.distinct()) parts.push_back(mk::bcast("c", mk::num(v), call0(spec_name(kk, bag.minus(v)))));
      if (kk > 0)
        parts.push_back(mk::recv("c", "x", dispatch(vs, [&](std::int64_t v) { return call0(spec_name(kk - 1, bag.plus(v))); })));
      env->define(spec_name(kk, bag), {{}, sum_all(parts)});
    }
  Network n;
  for (const char* v : {"i", "m", "o"}) n.graph.add_vertex(v);
  n.graph.add_edge("i", "m");
  n.graph.add_edge("m", "o");
  n.defs = env;
  n.system = flatten(SystemTerm::located("m", call0(spec_name(k, a))));
  return n;
}

namespace {

DefsPtr protocol_defs(const ProtocolConfig& cfg) {
  auto vs = cfg.distinct_values();
  int cap = cfg.k;
  auto env = std::make_shared<DefEnv>();
  const auto& row1 = cfg.lambda.at(1);
  for (int kk = 0; kk <= cfg.k; ++kk)
    for (const auto& bag : bags_up_to(vs, cap - kk))
      for (const auto& [h, p] : row1) {
        std::vector<TermRef> parts;
        if (kk > 0)
          parts.push_back(mk::recv("c", "x", hop_choice(row1, [&](int to) {
                                     return dispatch(vs, [&](std::int64_t v) { return call0(q_name(kk - 1, bag.plus(v), to)); });
                                   })));
        for (auto v : bag.distinct())
          parts.push_back(mk::bcast(channel_name(h), mk::num(v),
                                    hop_choice(row1, [&](int to) { return call0(q_name(kk, bag.minus(v), to)); })));
        env->define(q_name(kk, bag, h), {{}, sum_all(parts)});
      }
  for (const auto& bag : bags_up_to(vs, cap)) {
    std::vector<TermRef> parts;
    parts.push_back(mk::recv(channel_name(2), "x", dispatch(vs, [&](std::int64_t v) {
                               auto next = bag.plus(v);
                               return next.size() > cap ? mk::nil() : call0(r_name(next));
                             })));
    if (!cfg.drop_n2_output)
      for (auto v : bag.distinct()) parts.push_back(mk::bcast("c", mk::num(v), call0(r_name(bag.minus(v)))));
    env->define(r_name(bag), {{}, sum_all(parts)});
  }
  for (int h = 3; h <= cfg.j; ++h) {
    const auto& row = cfg.lambda.at(h);
    for (const auto& bag : bags_up_to(vs, cap))
      for (const auto& [to, p] : row) {
        std::vector<TermRef> parts;
        parts.push_back(mk::recv(channel_name(h), "x", hop_choice(row, [&](int nxt) {
                                   return dispatch(vs, [&](std::int64_t v) {
                                     auto next = bag.plus(v);
                                     return next.size() > cap ? mk::nil() : call0(s_name(h, next, nxt));
                                   });
                                 })));
        for (auto v : bag.distinct())
          parts.push_back(mk::bcast(channel_name(to), mk::num(v),
                                    hop_choice(row, [&](int nxt) { return call0(s_name(h, bag.minus(v), nxt)); })));
        env->define(s_name(h, bag, to), {{}, sum_all(parts)});
      }
  }
  return env;
}

}  // namespace

std::vector<std::pair<Network, double>> protocol_members(const ProtocolConfig& cfg) {
  auto v = topology_violations(cfg);
  if (!v.empty()) throw InvalidTopology(v);
  Network base;
  base.graph = cfg.graph;
  base.defs = protocol_defs(cfg);
  ValueMultiset empty;
  std::vector<std::pair<System, double>> acc = {{System{}, 1.0}};
  auto extend_with = [&](const std::string& node, const std::vector<std::pair<std::string, double>>& choices) {
    std::vector<std::pair<System, double>> next;
    for (const auto& [sys, w] : acc)
      for (const auto& [name, p] : choices) next.emplace_back(sys.with(node, call0(name)), w * p);
    acc = std::move(next);
  };
  std::vector<std::pair<std::string, double>> c1;
  for (const auto& [h, p] : cfg.lambda.at(1)) c1.emplace_back(q_name(cfg.k, empty, h), p);
  extend_with("n1", c1);
  extend_with("n2", {{r_name(empty), 1.0}});
  for (int h = 3; h <= cfg.j; ++h) {
    std::vector<std::pair<std::string, double>> ch;
    for (const auto& [to, p] : cfg.lambda.at(h)) ch.emplace_back(s_name(h, empty, to), p);
    extend_with(internal_name(h), ch);
  }
  std::vector<std::pair<Network, double>> out;
  for (auto& [sys, w] : acc) out.emplace_back(base.with_system(sys), w);
  return out;
}

Network build_protocol(const ProtocolConfig& cfg) { return protocol_members(cfg).front().first; }

Alphabet routing_alphabet(const ProtocolConfig& cfg) {
  Alphabet a;
  a.channels = {"c"};
  for (auto v : cfg.distinct_values()) a.values["i"].insert(Value::integer(v));
  return a;
}

std::optional<RoutingView> decode_routing_state(const System& s) {
  RoutingView view;
  for (const auto& [node, t] : s.nodes) {
    if (t->kind != TermKind::Call || !t->kids.empty()) return std::nullopt;
    std::string name = t->name;
    std::string key;
    if (name[0] == 'R' || name[0] == 'P') {
      auto us = name.find('_');
      if (us == std::string::npos) return std::nullopt;
      if (name[0] == 'P') view.budget = std::stoi(name.substr(1, us - 1));
      key = name.substr(us + 1);
    } else if (name[0] == 'Q' || name[0] == 'S') {
      auto us = name.find('_');
      auto to = name.rfind("_to");
      if (us == std::string::npos || to == std::string::npos || to <= us) return std::nullopt;
      if (name[0] == 'Q') view.budget = std::stoi(name.substr(1, us - 1));
      key = name.substr(us + 1, to - us - 1);
    } else {
      return std::nullopt;
    }
    auto bag = ValueMultiset::from_key(key);
    if (!bag) return std::nullopt;
    view.stored[node] = *bag;
  }
  return view;
}

EquivReport check_equiv(const ProtocolConfig& cfg, std::size_t bound) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  EquivReport rep;
  Network spec = build_spec(cfg.k, {}, cfg.distinct_values());
  Alphabet alpha = routing_alphabet(cfg);
  rep.equivalent = true;
  for (const auto& [impl, w] : protocol_members(cfg)) {
    auto t1 = clock::now();
    EquivMember m;
    m.weight = w;
    try {
      auto fwd = dfdsim_check(spec, impl, &alpha, bound);
      auto bwd = dfdsim_check(impl, spec, &alpha, bound);
      m.spec_le_impl = fwd.related;
      m.impl_le_spec = bwd.related;
      m.states = fwd.plts.size();
      m.relation_forward = fwd.relation.pairs.size();
      m.relation_backward = bwd.relation.pairs.size();
    } catch (const NotConvergent&) {
      rep.convergent = false;
    }
    m.seconds = std::chrono::duration<double>(clock::now() - t1).count();
    rep.equivalent = rep.equivalent && m.spec_le_impl && m.impl_le_spec;
    rep.members.push_back(m);
  }
  rep.seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return rep;
}

}  // namespace wnet
