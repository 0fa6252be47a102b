#include "wnet/syntax.hpp"

#include <algorithm>

#include "env_cache.hpp"

namespace wnet {

StateDist interpret(TermRef p) {
  p = mk::proc(p);
  StateDist out;
  struct Walk {
    StateDist& out;
    void go(TermRef t, double w) {
      if (t->kind == TermKind::Leaf) {
        out.add(t->kids[0], w);
        return;
      }
      go(t->kids[0], w * t->prob);
      go(t->kids[1], w * (1.0 - t->prob));
    }
  } walk{out};
  walk.go(p, 1.0);
  return out;
}

void DefEnv::define(const std::string& name, Definition d) {
  if (!d.body->is_state()) throw std::invalid_argument("definition body must be a state: " + name);
  if (d.body->free_depth > static_cast<int>(d.params.size()))
    throw std::invalid_argument("definition body has free variables: " + name);
  defs_[name] = std::move(d);
  std::lock_guard<std::mutex> lock(mu_);
  cache_.reset();
}

const Definition* DefEnv::find(const std::string& name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

DefEnv::Cache& DefEnv::cache() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!cache_) cache_ = std::make_shared<Cache>();
  return *cache_;
}

TermRef DefEnv::unfold(TermRef call) const {
  Cache& c = cache();
  {
    std::lock_guard<std::recursive_mutex> lock(c.mu);
    auto it = c.unfold.find(call->id);
    if (it != c.unfold.end()) return it->second;
  }
  const Definition* d = find(call->name);
  if (!d) throw UnboundDefinition(call->name);
  if (d->params.size() != call->kids.size())
    throw std::invalid_argument("arity mismatch calling " + call->name);
  std::vector<Value> vals;
  for (auto it = call->kids.rbegin(); it != call->kids.rend(); ++it) vals.push_back(eval(*it));
  TermRef body = normalize(subst(d->body, vals));
  std::lock_guard<std::recursive_mutex> lock(c.mu);
  c.unfold.emplace(call->id, body);
  return body;
}

DefsPtr DefEnv::merge(const DefsPtr& a, const DefsPtr& b) {
  if (a == b || b->empty()) return a;
  if (a->empty()) return b;
  auto out = std::make_shared<DefEnv>();
  for (const auto& [n, d] : a->all()) out->define(n, d);
  for (const auto& [n, d] : b->all()) {
    if (const Definition* e = out->find(n)) {
      if (e->body != d.body || e->params.size() != d.params.size()) throw DefinitionConflict(n);
      continue;
    }
    out->define(n, d);
  }
  return out;
}

SystemTerm SystemTerm::located(std::string n, TermRef s) {
  if (!s->is_state()) throw std::invalid_argument("located code must be a state");
  SystemTerm t;
  t.kind = Kind::Node;
  t.node = std::move(n);
  t.state = s;
  return t;
}

SystemTerm SystemTerm::par(SystemTerm a, SystemTerm b) {
  SystemTerm t;
  t.kind = Kind::Par;
  t.left = std::make_shared<const SystemTerm>(std::move(a));
  t.right = std::make_shared<const SystemTerm>(std::move(b));
  return t;
}

bool SystemTerm::operator==(const SystemTerm& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Nil: return true;
    case Kind::Node: return node == o.node && state == o.state;
    case Kind::Par: return *left == *o.left && *right == *o.right;
  }
  return false;
}

TermRef System::at(const std::string& n) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), n, [](const auto& p, const std::string& k) { return p.first < k; });
  if (it == nodes.end() || it->first != n) return nullptr;
  return it->second;
}

System System::with(const std::string& n, TermRef s) const {
  System out = *this;
  auto it = std::lower_bound(out.nodes.begin(), out.nodes.end(), n,
                             [](const auto& p, const std::string& k) { return p.first < k; });
  if (it != out.nodes.end() && it->first == n) {
    it->second = s;
  } else {
    out.nodes.insert(it, {n, s});
  }
  return out;
}

std::set<std::string> System::names() const {
  std::set<std::string> s;
  for (const auto& [n, t] : nodes) s.insert(n);
  return s;
}

bool System::operator<(const System& o) const {
  if (nodes.size() != o.nodes.size()) return nodes.size() < o.nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].first != o.nodes[i].first) return nodes[i].first < o.nodes[i].first;
    if (nodes[i].second != o.nodes[i].second) return nodes[i].second->id < o.nodes[i].second->id;
  }
  return false;
}

System flatten(const SystemTerm& t) {
  System out;
  struct Walk {
    System& out;
    void go(const SystemTerm& t) {
      switch (t.kind) {
        case SystemTerm::Kind::Nil: return;
        case SystemTerm::Kind::Node: out.nodes.emplace_back(t.node, normalize(t.state)); return;
        case SystemTerm::Kind::Par:
          go(*t.left);
          go(*t.right);
          return;
      }
    }
  } walk{out};
  walk.go(t);
  std::sort(out.nodes.begin(), out.nodes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < out.nodes.size(); ++i)
    if (out.nodes[i].first == out.nodes[i - 1].first) throw InvalidNetwork("node occurs twice: " + out.nodes[i].first);
  return out;
}

SystemTerm to_term(const System& s) {
  if (s.nodes.empty()) return SystemTerm::nil();
  SystemTerm acc = SystemTerm::located(s.nodes.back().first, s.nodes.back().second);
  for (auto it = s.nodes.rbegin() + 1; it != s.nodes.rend(); ++it)
    acc = SystemTerm::par(SystemTerm::located(it->first, it->second), std::move(acc));
  return acc;
}

SystemTerm canonicalize(const SystemTerm& t) { return to_term(flatten(t)); }

bool congruent(const SystemTerm& a, const SystemTerm& b) { return canonicalize(a) == canonicalize(b); }

void Graph::add_edge(const std::string& a, const std::string& b) {
  if (a == b) throw InvalidNetwork("self loop on " + a);
  vertices.insert(a);
  vertices.insert(b);
  edges.insert({a, b});
}

std::vector<std::string> Graph::successors(const std::string& v) const {
  std::vector<std::string> out;
  for (auto it = edges.lower_bound({v, std::string()}); it != edges.end() && it->first == v; ++it) out.push_back(it->second);
  return out;
}

std::vector<std::string> Graph::predecessors(const std::string& v) const {
  std::vector<std::string> out;
  for (const auto& [a, b] : edges)
    if (b == v) out.push_back(a);
  return out;
}

std::set<std::string> Network::externals() const {
  std::set<std::string> out;
  for (const auto& v : graph.vertices)
    if (!system.at(v)) out.insert(v);
  return out;
}

void validate(const Network& n) {
  for (std::size_t i = 1; i < n.system.nodes.size(); ++i)
    if (n.system.nodes[i].first == n.system.nodes[i - 1].first) throw InvalidNetwork("node occurs twice: " + n.system.nodes[i].first);
  for (const auto& [v, s] : n.system.nodes)
    if (!n.graph.vertices.count(v)) throw InvalidNetwork("node not in graph: " + v);
  for (const auto& [a, b] : n.graph.edges) {
    if (a == b) throw InvalidNetwork("self loop on " + a);
    if (!n.graph.vertices.count(a) || !n.graph.vertices.count(b)) throw InvalidNetwork("edge endpoint not a vertex");
  }
}

bool well_formed(const Network& n) {
  std::set<std::string> touched;
  for (const auto& [a, b] : n.graph.edges) {
    bool ia = n.system.at(a) != nullptr, ib = n.system.at(b) != nullptr;
    if (!ia && !ib) return false;
    if (ia && !ib) touched.insert(b);
    if (ib && !ia) touched.insert(a);
  }
  for (const auto& e : n.externals())
    if (!touched.count(e)) return false;
  return true;
}

Interface interface(const Network& n) {
  Interface io;
  for (const auto& [a, b] : n.graph.edges) {
    bool ia = n.system.at(a) != nullptr, ib = n.system.at(b) != nullptr;
    if (!ia && ib) io.in.insert(a);
    if (ia && !ib) io.out.insert(b);
  }
  return io;
}

}  // namespace wnet
