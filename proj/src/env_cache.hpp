#pragma once

#include <map>
#include <mutex>
#include <tuple>
#include <unordered_map>

#include "wnet/intensional.hpp"
#include "wnet/syntax.hpp"

namespace wnet {

struct DefEnv::Cache {
  std::recursive_mutex mu;
  std::unordered_map<std::uint32_t, TermRef> unfold;
  std::unordered_map<std::uint32_t, std::vector<StateStep>> steps;
  std::map<std::tuple<std::uint32_t, std::string, Value>, std::vector<StateDist>> receives;
  std::unordered_map<std::uint32_t, bool> omega;
  std::unordered_map<std::uint32_t, std::set<std::string>> listens;
};

}  // namespace wnet
