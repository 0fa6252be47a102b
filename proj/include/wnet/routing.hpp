#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wnet/checkers.hpp"

namespace wnet {

class ValueMultiset {
 public:
  ValueMultiset() = default;
  ValueMultiset(std::initializer_list<std::int64_t> vs) {
    for (auto v : vs) add(v);
  }

  void add(std::int64_t v, int n = 1) {
    if (n > 0) counts_[v] += n;
  }
  // Removes one copy; no effect when absent.
  void remove(std::int64_t v);
  ValueMultiset plus(std::int64_t v) const;
  ValueMultiset minus(std::int64_t v) const;
  ValueMultiset united(const ValueMultiset& o) const;

  int count(std::int64_t v) const;
  bool contains(std::int64_t v) const { return count(v) > 0; }
  int size() const;
  bool empty() const { return counts_.empty(); }
  std::vector<std::int64_t> distinct() const;
  const std::map<std::int64_t, int>& counts() const { return counts_; }

  // "e" for the empty bag, otherwise the sorted values joined by '_' (negatives as nK).
  std::string key() const;
  static std::optional<ValueMultiset> from_key(const std::string& key);

  bool operator==(const ValueMultiset& o) const = default;
  auto operator<=>(const ValueMultiset& o) const = default;

 private:
  std::map<std::int64_t, int> counts_;
};

// All bags over the given values with at most `max_size` elements.
std::vector<ValueMultiset> bags_up_to(const std::vector<std::int64_t>& values, int max_size);

struct ProtocolConfig {
  int j = 2;
  Graph graph;  // over i, o, n1..nj
  std::map<int, std::map<int, double>> lambda;
  int k = 1;
  std::vector<std::int64_t> values;
  bool drop_n2_output = false;  // mutation used to show the check has teeth

  std::vector<std::int64_t> distinct_values() const;
};

class InvalidTopology : public std::runtime_error {
 public:
  explicit InvalidTopology(std::vector<std::string> v);
  std::vector<std::string> violations;
};

std::string internal_name(int h);
std::string channel_name(int h);

// Missing lambda rows become uniform over the out-neighbours; values default to 1..k.
ProtocolConfig make_config(int j, const std::vector<std::pair<std::string, std::string>>& edges,
                           std::map<int, std::map<int, double>> lambda, int k, std::vector<std::int64_t> values = {});
ProtocolConfig load_topology(const std::string& path, int k, std::vector<std::int64_t> values = {});

std::vector<std::string> topology_violations(const ProtocolConfig& cfg);

Network build_spec(int k, const ValueMultiset& a, const std::vector<std::int64_t>& values);
inline Network build_spec(int k, const ValueMultiset& a) {
  std::vector<std::int64_t> vs;
  for (int v = 1; v <= k; ++v) vs.push_back(v);
  for (auto v : a.distinct()) vs.push_back(v);
  return build_spec(k, a, vs);
}

// Canonical member: every node starts with the first next hop of its row.
Network build_protocol(const ProtocolConfig& cfg);
// Every network in the support of the initial protocol distribution, with weights.
std::vector<std::pair<Network, double>> protocol_members(const ProtocolConfig& cfg);

Alphabet routing_alphabet(const ProtocolConfig& cfg);

// Decoded code at each node of a routing state.
struct RoutingView {
  std::optional<int> budget;  // k at n1
  std::map<std::string, ValueMultiset> stored;
};
std::optional<RoutingView> decode_routing_state(const System& s);

struct EquivMember {
  double weight = 0;
  bool spec_le_impl = false;
  bool impl_le_spec = false;
  std::size_t states = 0;
  std::size_t relation_forward = 0;
  std::size_t relation_backward = 0;
  double seconds = 0;
};

struct EquivReport {
  bool equivalent = false;
  bool convergent = true;
  std::vector<EquivMember> members;
  double seconds = 0;
};

EquivReport check_equiv(const ProtocolConfig& cfg, std::size_t bound = default_state_bound());

}  // namespace wnet
