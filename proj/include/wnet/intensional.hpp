#pragma once

#include <string>
#include <vector>

#include "wnet/syntax.hpp"

namespace wnet {

struct StateAction {
  enum class Kind { Out, In, Tau } kind = Kind::Tau;
  std::string chan;
  Value value;
  bool operator==(const StateAction&) const = default;
};

struct StateStep {
  StateAction act;
  StateDist target;
};

std::vector<StateStep> state_steps(TermRef s, const DefEnv& defs);
std::vector<StateDist> state_receives(TermRef s, const std::string& chan, const Value& v, const DefEnv& defs);
bool state_omega(TermRef s, const DefEnv& defs);

struct NetAction {
  enum class Kind { Tau, Out, In } kind = Kind::Tau;
  std::string node;
  std::string chan;
  Value value;
  bool operator==(const NetAction&) const = default;
};

struct NetStep {
  NetAction act;
  SystemDist target;
};

class SourceIsInternal : public std::runtime_error {
 public:
  explicit SourceIsInternal(const std::string& n) : std::runtime_error("input source is an internal node: " + n) {}
};

std::vector<NetStep> net_steps(const Network& n);
std::vector<SystemDist> net_input(const Network& n, const std::string& from, const std::string& chan, const Value& v);
bool omega_pred(const Network& n);
std::vector<SystemDist> reduce(const Network& n);

bool same_dist(const SystemDist& a, const SystemDist& b);

}  // namespace wnet
