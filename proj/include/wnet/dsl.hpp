#pragma once

#include <map>
#include <string>
#include <vector>

#include "wnet/syntax.hpp"

namespace wnet {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& expected)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": expected " + expected),
        line(line),
        col(col),
        expected(expected) {}
  int line, col;
  std::string expected;
};

struct NetFile {
  std::map<std::string, Definition> shared;
  std::vector<std::string> order;
  std::map<std::string, Network> nets;

  const Network& get(const std::string& name) const;
};

NetFile parse_netfile(const std::string& text);
NetFile load_netfile(const std::string& path);

// Parses a single state or process with no free variables.
TermRef parse_state(const std::string& text);
TermRef parse_proc(const std::string& text);

// "FILE#NAME", or "FILE" when the file holds exactly one network.
Network resolve_network(const std::string& ref);

std::string print_expr(TermRef e, const std::vector<std::string>& scope = {});
std::string print_state(TermRef s, const std::vector<std::string>& scope = {});
std::string print_proc(TermRef p, const std::vector<std::string>& scope = {});
std::string print_system(const System& s);
std::string print_network(const std::string& name, const Network& n);
std::string print_netfile(const NetFile& f);

std::string network_to_dot(const Network& n);

}  // namespace wnet
