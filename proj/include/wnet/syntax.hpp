#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wnet/prob.hpp"
#include "wnet/term.hpp"

namespace wnet {

using StateDist = SubDistribution<TermRef, TermLess>;

StateDist interpret(TermRef proc);

struct Definition {
  std::vector<std::string> params;
  TermRef body;
};

class UnboundDefinition : public std::runtime_error {
 public:
  explicit UnboundDefinition(const std::string& name) : std::runtime_error("unbound definition: " + name), name(name) {}
  std::string name;
};

class DefinitionConflict : public std::runtime_error {
 public:
  explicit DefinitionConflict(const std::string& name)
      : std::runtime_error("conflicting definitions for " + name), name(name) {}
  std::string name;
};

// Definition table plus the memo tables the semantics keeps per environment.
class DefEnv {
 public:
  void define(const std::string& name, Definition d);
  const Definition* find(const std::string& name) const;
  const std::map<std::string, Definition>& all() const { return defs_; }
  bool empty() const { return defs_.empty(); }

  // Unfolds a closed call into its normalized body.
  TermRef unfold(TermRef call) const;

  static std::shared_ptr<const DefEnv> merge(const std::shared_ptr<const DefEnv>& a, const std::shared_ptr<const DefEnv>& b);

  struct Cache;
  Cache& cache() const;

 private:
  std::map<std::string, Definition> defs_;
  mutable std::shared_ptr<Cache> cache_;
  mutable std::mutex mu_;
};

using DefsPtr = std::shared_ptr<const DefEnv>;

// Syntactic system terms, before flattening.
struct SystemTerm {
  enum class Kind { Node, Par, Nil } kind = Kind::Nil;
  std::string node;
  TermRef state = nullptr;
  std::shared_ptr<const SystemTerm> left, right;

  static SystemTerm nil() { return {}; }
  static SystemTerm located(std::string n, TermRef s);
  static SystemTerm par(SystemTerm a, SystemTerm b);
  bool operator==(const SystemTerm& o) const;
};

// Canonical system: located states sorted by node name.
struct System {
  std::vector<std::pair<std::string, TermRef>> nodes;

  TermRef at(const std::string& n) const;
  System with(const std::string& n, TermRef s) const;
  std::set<std::string> names() const;
  bool operator==(const System& o) const { return nodes == o.nodes; }
  bool operator<(const System& o) const;
};

using SystemDist = SubDistribution<System>;

System flatten(const SystemTerm& t);
SystemTerm to_term(const System& s);
SystemTerm canonicalize(const SystemTerm& t);
bool congruent(const SystemTerm& a, const SystemTerm& b);

struct Graph {
  std::set<std::string> vertices;
  std::set<std::pair<std::string, std::string>> edges;

  void add_vertex(const std::string& v) { vertices.insert(v); }
  void add_edge(const std::string& a, const std::string& b);
  bool has_edge(const std::string& a, const std::string& b) const { return edges.count({a, b}) > 0; }
  std::vector<std::string> successors(const std::string& v) const;
  std::vector<std::string> predecessors(const std::string& v) const;
  bool operator==(const Graph& o) const = default;
};

struct Interface {
  std::set<std::string> in, out;
  bool operator==(const Interface& o) const = default;
};

struct Network {
  Graph graph;
  System system;
  DefsPtr defs = std::make_shared<DefEnv>();

  std::set<std::string> nodes() const { return system.names(); }
  std::set<std::string> externals() const;
  Network with_system(System s) const {
    Network n = *this;
    n.system = std::move(s);
    return n;
  }
};

class InvalidNetwork : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checks the basic invariants: unique nodes, nodes within vertices, irreflexive edges.
void validate(const Network& n);
bool well_formed(const Network& n);
Interface interface(const Network& n);

}  // namespace wnet
