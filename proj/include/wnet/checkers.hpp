#pragma once

#include <set>
#include <utility>
#include <vector>

#include "wnet/extensional.hpp"

namespace wnet {

struct SimRelation {
  enum class Kind { Simulation, DfDeadlock } kind = Kind::Simulation;
  std::set<std::pair<int, int>> pairs;
  bool contains(int a, int b) const { return pairs.count({a, b}) > 0; }
};

using IndexDist = std::vector<std::pair<int, double>>;

class NotConvergent : public std::runtime_error {
 public:
  NotConvergent() : std::runtime_error("network is not convergent") {}
};

// Is there Θ with s ==λ==> Θ and target lift(rel) Θ?
bool weak_match(const Plts& p, int s, const ExtAction& lambda, const IndexDist& target, const SimRelation& rel);

// Can s reach, through internal moves only, a full distribution supported on `goal`?
bool weak_tau_to(const Plts& p, int s, const std::vector<char>& goal);

struct CheckOutcome {
  bool related = false;
  bool interface_mismatch = false;
  bool ill_formed = false;
  SimRelation relation;
  Plts plts;
  int root_m = -1;
  int root_n = -1;
  long sweeps = 0;
  std::size_t initial_pairs = 0;
};

CheckOutcome sim_check(const Network& m, const Network& n, const Alphabet* alphabet = nullptr,
                       std::size_t bound = default_state_bound());
CheckOutcome dfdsim_check(const Network& m, const Network& n, const Alphabet* alphabet = nullptr,
                          std::size_t bound = default_state_bound());

// Rows of a candidate deadlock simulation: a state related to a sub-distribution.
using DsimCandidate = std::vector<std::pair<int, IndexDist>>;
bool dsim_verify(const Plts& p, const DsimCandidate& candidate);

}  // namespace wnet
