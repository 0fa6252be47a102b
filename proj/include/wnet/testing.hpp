#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wnet/extensional.hpp"

namespace wnet {

// Finite MDP: per state a list of actions, each a distribution over states.
struct Mdp {
  using Dist = std::vector<std::pair<int, double>>;
  std::vector<std::vector<Dist>> actions;
  std::vector<char> goal;
  int root = 0;
  std::size_t size() const { return actions.size(); }
};

// Reduction system of a network: every internal step or broadcast is a move;
// successful states are goals and have no moves.
Mdp reduction_mdp(const Network& n, std::size_t bound = default_state_bound());

// Values after exactly k synchronous sweeps starting from the goal indicator.
std::vector<double> value_sweeps(const Mdp& m, int k, bool maximize);

class NonConvergedIteration : public std::runtime_error {
 public:
  explicit NonConvergedIteration(long iters)
      : std::runtime_error("value iteration did not converge within " + std::to_string(iters) + " sweeps"), iters(iters) {}
  long iters;
};

struct ReachResult {
  std::vector<double> values;
  long iterations = 0;
};

ReachResult reach_values(const Mdp& m, bool maximize, double tol, long max_iter);

struct ResultBounds {
  double sup = 0;
  double inf = 0;
  double tolerance = 1e-9;
  long iterations = 0;
  std::size_t states = 0;
};

double value(const SystemDist& d, const DefEnv& defs);

ResultBounds result_bounds(const Network& n, double tol = 1e-9, long max_iter = 1000000,
                           std::size_t bound = default_state_bound());

enum class Preorder { Hoare, Smith };
bool compare_results(const ResultBounds& a, const ResultBounds& b, Preorder mode);

enum class TestMode { May, Must };

struct Refutation {
  std::string reason;  // "interface" or "test"
  int test_index = -1;
  ResultBounds left, right;
};

struct RefuteStats {
  int run = 0;
  int skipped = 0;
};

std::optional<Refutation> refute(const Network& m, const Network& n, const std::vector<Network>& tests, TestMode mode,
                                 double tol = 1e-9, RefuteStats* stats = nullptr);

// Random tests occupying the interface of the subjects: small terms over the
// channels and values the subjects use, plus an observer node.
std::vector<Network> generate_tests(const std::vector<Network>& subjects, int count, std::uint64_t seed);

}  // namespace wnet
