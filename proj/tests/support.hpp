#pragma once

#include <random>
#include <string>
#include <vector>

#include "wnet/dsl.hpp"
#include "wnet/syntax.hpp"

namespace wnet::testsupport {

inline std::string fixture(const std::string& name) { return std::string(WNET_SOURCE_DIR) + "/nets/" + name; }

inline Network net(const std::string& file, const std::string& name) { return load_netfile(fixture(file)).get(name); }

// Small random closed terms without recursion, so every generated network
// has a finite, acyclic state space.
struct Gen {
  std::mt19937_64 rng;
  std::vector<std::string> chans{"c", "d"};
  bool allow_omega = true;

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool coin(int one_in) { return pick(one_in) == 0; }

  TermRef expr(int bound) {
    if (bound > 0 && pick(2) == 0) return mk::var(pick(bound));
    return mk::num(pick(2));
  }

  const std::string& chan() { return chans[static_cast<std::size_t>(pick(static_cast<int>(chans.size())))]; }

  TermRef proc(int depth, int bound) {
    if (depth > 0 && coin(4)) {
      static const double ps[] = {0.25, 0.5, 0.75};
      return mk::choice(state(depth - 1, bound), ps[pick(3)], state(depth - 1, bound));
    }
    return mk::proc(state(depth, bound));
  }

  TermRef state(int depth, int bound) {
    if (depth == 0) {
      int r = pick(allow_omega ? 4 : 3);
      if (r == 3) return mk::omega();
      if (r == 2) return mk::bcast(chan(), expr(bound), mk::proc(mk::nil()));
      return mk::nil();
    }
    switch (pick(allow_omega ? 9 : 8)) {
      case 0: return mk::nil();
      case 1:
      case 2: return mk::recv(chan(), "x", proc(depth - 1, bound + 1));
      case 3:
      case 4: return mk::bcast(chan(), expr(bound), proc(depth - 1, bound));
      case 5: return mk::tau(proc(depth - 1, bound));
      case 6: return mk::sum(state(depth - 1, bound), state(depth - 1, bound));
      case 7: return mk::match(mk::bin(BinOp::Eq, expr(bound), mk::num(pick(2))), state(depth - 1, bound),
                               state(depth - 1, bound));
      default: return mk::omega();
    }
  }

  // Well-formed network whose internal nodes come from `internals` and whose
  // externals come from `externals`.
  Network network(const std::vector<std::string>& internals, const std::vector<std::string>& externals, int depth = 2,
                  int edge_one_in = 2) {
    Network n;
    SystemTerm st = SystemTerm::nil();
    for (const auto& v : internals) {
      n.graph.add_vertex(v);
      st = SystemTerm::par(st, SystemTerm::located(v, state(depth, 0)));
    }
    n.system = flatten(st);
    for (const auto& a : internals)
      for (const auto& b : internals)
        if (a != b && coin(edge_one_in)) n.graph.add_edge(a, b);
    for (const auto& e : externals) {
      for (const auto& v : internals) {
        if (coin(edge_one_in)) n.graph.add_edge(e, v);
        if (coin(edge_one_in)) n.graph.add_edge(v, e);
      }
    }
    return n;
  }

  std::vector<std::string> subset(const std::vector<std::string>& pool, std::size_t min_size) {
    std::vector<std::string> out;
    while (out.size() < min_size) {
      out.clear();
      for (const auto& v : pool)
        if (coin(2)) out.push_back(v);
    }
    return out;
  }
};

}  // namespace wnet::testsupport
