#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wnet/intensional.hpp"

namespace wnet {

struct ExtAction {
  enum class Kind { Tau, In, Out } kind = Kind::Tau;
  std::string node;  // input node for In
  std::string chan;
  Value value;
  std::set<std::string> eta;  // listening output nodes for Out

  static ExtAction tau() { return {}; }
  static ExtAction in(std::string n, std::string c, Value v) { return {Kind::In, std::move(n), std::move(c), std::move(v), {}}; }
  static ExtAction out(std::string c, Value v, std::set<std::string> eta) {
    return {Kind::Out, {}, std::move(c), std::move(v), std::move(eta)};
  }

  std::string label() const;
  auto operator<=>(const ExtAction&) const = default;
  bool operator==(const ExtAction&) const = default;
};

struct Alphabet {
  std::set<std::string> channels;
  std::map<std::string, std::set<Value>> values;  // per input node
  bool defaulted = false;
};

Alphabet default_alphabet(const std::vector<Network>& nets);

struct ExtStep {
  ExtAction act;
  SystemDist target;
};

std::vector<ExtStep> ext_steps(const Network& n, const Alphabet& alphabet);
bool deadlocked(const Network& n);

class StateSpaceExceeded : public std::runtime_error {
 public:
  explicit StateSpaceExceeded(std::size_t bound)
      : std::runtime_error("state space exceeds bound of " + std::to_string(bound)), bound(bound) {}
  std::size_t bound;
};

inline std::size_t& default_state_bound() {
  static std::size_t b = 200000;
  return b;
}

struct Plts {
  struct Group {
    Graph graph;
    DefsPtr defs;
    Interface io;
  };
  struct Trans {
    ExtAction act;
    std::vector<std::pair<int, double>> dist;
  };

  std::vector<Group> groups;
  std::vector<System> systems;
  std::vector<int> group_of;
  std::vector<std::vector<Trans>> trans;
  std::vector<char> omega, deadlock;
  std::vector<int> roots;
  Alphabet alphabet;

  std::size_t size() const { return systems.size(); }
  Network network(int s) const;
};

Plts build_plts(const std::vector<Network>& roots, const Alphabet& alphabet, std::size_t bound = default_state_bound());

// States from which all mass can be kept moving through internal steps forever.
std::vector<char> divergent_states(const Plts& p);
bool is_convergent(const Plts& p);

std::string to_dot(const Plts& p);
std::string to_json(const Plts& p);

}  // namespace wnet
