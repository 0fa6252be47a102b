#include "wnet/compose.hpp"

namespace wnet {

namespace {

Network unite(const Network& m, const Network& p) {
  Network out;
  out.graph = m.graph;
  for (const auto& v : p.graph.vertices) out.graph.add_vertex(v);
  for (const auto& [a, b] : p.graph.edges) out.graph.edges.insert({a, b});
  out.system = m.system;
  for (const auto& [n, s] : p.system.nodes) out.system = out.system.with(n, s);
  out.defs = DefEnv::merge(m.defs, p.defs);
  return out;
}

}  // namespace

std::optional<Network> extend(const Network& m, const Network& p) {
  for (const auto& [n, s] : m.system.nodes)
    if (p.graph.vertices.count(n)) return std::nullopt;
  return unite(m, p);
}

std::optional<std::pair<Network, Network>> decompose(const Network& m) {
  if (m.system.nodes.empty()) return std::nullopt;
  const auto& [g, s] = m.system.nodes.front();

  Network gen;
  gen.defs = m.defs;
  gen.graph.add_vertex(g);
  gen.system = gen.system.with(g, s);
  for (const auto& [a, b] : m.graph.edges) {
    if (a == g && !m.system.at(b)) gen.graph.add_edge(a, b);
    if (b == g && !m.system.at(a)) gen.graph.add_edge(a, b);
  }

  Network rest;
  rest.defs = m.defs;
  rest.system = m.system;
  rest.system.nodes.erase(rest.system.nodes.begin());
  for (const auto& [n, st] : rest.system.nodes) rest.graph.add_vertex(n);
  for (const auto& [a, b] : m.graph.edges) {
    if (gen.graph.has_edge(a, b)) continue;
    if (rest.system.at(a) || rest.system.at(b)) rest.graph.add_edge(a, b);
  }
  return std::make_pair(std::move(rest), std::move(gen));
}

Network closure(const Network& m) {
  Network out;
  out.defs = m.defs;
  out.system = m.system;
  for (const auto& v : m.graph.vertices)
    if (m.system.at(v)) out.graph.add_vertex(v);
  for (const auto& [a, b] : m.graph.edges)
    if (m.system.at(a) && m.system.at(b)) out.graph.edges.insert({a, b});
  return out;
}

std::optional<Network> sym_merge(const Network& m, const Network& n) {
  for (const auto& [x, s] : m.system.nodes)
    if (n.system.at(x)) return std::nullopt;
  // Both graphs must agree on every edge touching an internal node of either side.
  auto agrees = [](const Network& own, const Network& other) {
    for (const auto& [x, s] : own.system.nodes) {
      for (const auto& [a, b] : own.graph.edges)
        if ((a == x || b == x) && !other.graph.has_edge(a, b)) return false;
      for (const auto& [a, b] : other.graph.edges)
        if ((a == x || b == x) && !own.graph.has_edge(a, b)) return false;
    }
    return true;
  };
  if (!agrees(m, n) || !agrees(n, m)) return std::nullopt;
  return unite(m, n);
}

Network rename_nodes(const Network& m, const std::map<std::string, std::string>& perm) {
  auto ren = [&](const std::string& v) {
    auto it = perm.find(v);
    return it == perm.end() ? v : it->second;
  };
  Network out;
  out.defs = m.defs;
  for (const auto& v : m.graph.vertices) out.graph.add_vertex(ren(v));
  for (const auto& [a, b] : m.graph.edges) out.graph.edges.insert({ren(a), ren(b)});
  for (const auto& [n, s] : m.system.nodes) out.system = out.system.with(ren(n), s);
  return out;
}

}  // namespace wnet
