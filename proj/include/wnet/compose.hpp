#pragma once

#include <optional>
#include <utility>

#include "wnet/syntax.hpp"

namespace wnet {

std::optional<Network> extend(const Network& m, const Network& p);

// Splits off the generator at the smallest internal node: returns (rest, generator)
// with extend(rest, generator) congruent to m.
std::optional<std::pair<Network, Network>> decompose(const Network& m);

Network closure(const Network& m);

std::optional<Network> sym_merge(const Network& m, const Network& n);

Network rename_nodes(const Network& m, const std::map<std::string, std::string>& perm);

}  // namespace wnet
