#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wnet/checkers.hpp"
#include "wnet/compose.hpp"
#include "wnet/dsl.hpp"
#include "wnet/routing.hpp"
#include "wnet/testing.hpp"

using namespace wnet;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFails = 1;
constexpr int kUsage = 2;
constexpr int kPrecondition = 3;

struct Globals {
  double tol = 1e-9;
  std::size_t max_states = 200000;
  std::vector<std::string> inputs;
  std::uint64_t seed = 1;
  bool json = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Value parse_value(const std::string& s) {
  if (s == "true" || s == "false") return Value::boolean(s == "true");
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return Value::integer(v);
  } catch (const std::exception&) {
  }
  return Value::symbol(s);
}

// --inputs v1,v2@node (repeatable); a spec without @node applies to every input node.
std::optional<Alphabet> alphabet_for(const Globals& g, const std::vector<Network>& nets) {
  if (g.inputs.empty()) return std::nullopt;
  Alphabet a = default_alphabet(nets);
  a.defaulted = false;
  std::set<std::string> inputs;
  for (const auto& n : nets)
    for (const auto& i : interface(n).in) inputs.insert(i);
  std::map<std::string, std::set<Value>> vals;
  for (const auto& spec : g.inputs) {
    auto at = spec.find('@');
    std::string list = spec.substr(0, at);
    std::set<Value> vs;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) vs.insert(parse_value(item));
    if (at == std::string::npos) {
      for (const auto& i : inputs) vals[i].insert(vs.begin(), vs.end());
    } else {
      vals[spec.substr(at + 1)].insert(vs.begin(), vs.end());
    }
  }
  a.values = vals;
  return a;
}

json bounds_json(const ResultBounds& b) {
  return {{"sup", b.sup}, {"inf", b.inf}, {"tolerance", b.tolerance}, {"iterations", b.iterations}, {"states", b.states}};
}

void emit(const Globals& g, const json& j, const std::string& human) {
  if (g.json) {
    json out = j;
    out["schema"] = 1;
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

// True when the default alphabet is in force and some network actually has inputs.
bool note_default_alphabet(const std::optional<Alphabet>& alpha, const std::vector<Network>& nets) {
  if (alpha) return false;
  for (const auto& n : nets)
    if (!interface(n).in.empty()) {
      std::cerr << "note: input alphabet defaulted to the broadcast literals plus one fresh value per input node\n";
      return true;
    }
  return false;
}

int cmd_wf(const Globals& g, const std::string& ref) {
  Network n = resolve_network(ref);
  bool ok = well_formed(n);
  Interface io = interface(n);
  emit(g, {{"well_formed", ok}, {"inputs", io.in}, {"outputs", io.out}}, ok ? "well-formed\n" : "ill-formed\n");
  return ok ? kOk : kFails;
}

int cmd_lts(const Globals& g, const std::string& ref, bool dot, bool as_json) {
  Network n = resolve_network(ref);
  auto alpha = alphabet_for(g, {n});
  note_default_alphabet(alpha, {n});
  Plts p = build_plts({n}, alpha ? *alpha : default_alphabet({n}), g.max_states);
  if (dot) {
    std::cout << to_dot(p);
  } else if (as_json || g.json) {
    std::cout << to_json(p) << "\n";
  } else {
    std::size_t t = 0;
    for (const auto& ts : p.trans) t += ts.size();
    std::cout << p.size() << " states, " << t << " transitions\n";
  }
  return kOk;
}

int cmd_compose(const Globals& g, const std::string& a, const std::string& b, const std::string& out) {
  auto r = extend(resolve_network(a), resolve_network(b));
  if (!r) {
    std::cerr << "composition undefined: the second network occupies nodes of the first\n";
    return kPrecondition;
  }
  std::string text = print_network("composite", *r);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
    if (g.json) emit(g, {{"written", out}}, "");
  }
  return kOk;
}

int cmd_results(const Globals& g, const std::string& ref, long bound) {
  Network n = resolve_network(ref);
  auto b = result_bounds(n, g.tol, bound, g.max_states);
  std::ostringstream os;
  os << "sup " << b.sup << "\ninf " << b.inf << "\n";
  emit(g, bounds_json(b), os.str());
  return kOk;
}

std::vector<Network> load_tests(const std::vector<std::string>& refs) {
  std::vector<Network> tests;
  for (const auto& ref : refs) {
    if (ref.find('#') != std::string::npos) {
      tests.push_back(resolve_network(ref));
      continue;
    }
    NetFile f = load_netfile(ref);
    for (const auto& name : f.order) tests.push_back(f.get(name));
  }
  return tests;
}

int cmd_refute(const Globals& g, TestMode mode, const std::string& a, const std::string& b,
               const std::vector<std::string>& test_refs, int generate) {
  Network m = resolve_network(a), n = resolve_network(b);
  auto tests = load_tests(test_refs);
  if (generate > 0) {
    auto extra = generate_tests({m, n}, generate, g.seed);
    tests.insert(tests.end(), extra.begin(), extra.end());
  }
  if (tests.empty()) throw UsageError("no tests given (use --tests or --generate)");
  RefuteStats st;
  auto r = refute(m, n, tests, mode, g.tol, &st);
  if (r && r->reason == "interface") {
    std::cerr << "interfaces differ\n";
    emit(g, {{"refuted", false}, {"reason", "interface"}}, "");
    return kPrecondition;
  }
  json j = {{"refuted", r.has_value()}, {"run", st.run}, {"skipped", st.skipped}};
  std::ostringstream os;
  if (r) {
    j["test"] = r->test_index;
    j["left"] = bounds_json(r->left);
    j["right"] = bounds_json(r->right);
    os << "refuted by test " << r->test_index << ": left [" << r->left.inf << ", " << r->left.sup << "] right ["
       << r->right.inf << ", " << r->right.sup << "]\n";
  } else {
    os << "no refutation among " << st.run << " tests (" << st.skipped << " skipped)\n";
  }
  emit(g, j, os.str());
  return r ? kFails : kOk;
}

json relation_json(const CheckOutcome& o) {
  json pairs = json::array();
  for (const auto& [a, b] : o.relation.pairs)
    pairs.push_back({{"left", a}, {"right", b}, {"left_system", print_system(o.plts.systems[static_cast<std::size_t>(a)])},
                     {"right_system", print_system(o.plts.systems[static_cast<std::size_t>(b)])}});
  return pairs;
}

int cmd_sim(const Globals& g, bool deadlock, const std::string& a, const std::string& b, const std::string& witness) {
  Network m = resolve_network(a), n = resolve_network(b);
  auto alpha = alphabet_for(g, {m, n});
  CheckOutcome o;
  try {
    o = deadlock ? dfdsim_check(m, n, alpha ? &*alpha : nullptr, g.max_states)
                 : sim_check(m, n, alpha ? &*alpha : nullptr, g.max_states);
  } catch (const NotConvergent& e) {
    std::cerr << e.what() << "\n";
    return kPrecondition;
  }
  if (o.ill_formed) {
    std::cerr << "both networks must be well-formed\n";
    return kPrecondition;
  }
  if (o.interface_mismatch) {
    std::cerr << "interfaces differ\n";
    return kPrecondition;
  }
  bool defaulted = note_default_alphabet(alpha, {m, n});
  json j = {{"related", o.related},
            {"states", o.plts.size()},
            {"pairs", o.relation.pairs.size()},
            {"sweeps", o.sweeps},
            {"default_alphabet", defaulted}};
  if (!witness.empty()) {
    json w = {{"schema", 1},
              {"kind", deadlock ? "dfdsim" : "sim"},
              {"root_left", o.root_m},
              {"root_right", o.root_n},
              {"pairs", relation_json(o)}};
    if (witness == "-") {
      std::cout << w.dump(2) << "\n";
    } else {
      std::ofstream f(witness);
      f << w.dump(2) << "\n";
    }
  }
  emit(g, j, o.related ? "related\n" : "not related\n");
  return o.related ? kOk : kFails;
}

std::vector<std::int64_t> parse_values(const std::string& s) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoll(item));
  return out;
}

int cmd_routing(const Globals& g, int k, const std::string& topology, const std::string& values, bool mutate) {
  ProtocolConfig cfg = load_topology(topology, k, parse_values(values));
  cfg.drop_n2_output = mutate;
  auto v = topology_violations(cfg);
  if (!v.empty()) {
    for (const auto& x : v) std::cerr << "topology: " << x << "\n";
    emit(g, {{"valid", false}, {"violations", v}}, "");
    return kPrecondition;
  }
  auto rep = check_equiv(cfg, g.max_states);
  if (!rep.convergent) {
    std::cerr << "protocol is not convergent\n";
    return kPrecondition;
  }
  json members = json::array();
  for (const auto& m : rep.members)
    members.push_back({{"weight", m.weight},
                       {"spec_below_protocol", m.spec_le_impl},
                       {"protocol_below_spec", m.impl_le_spec},
                       {"states", m.states},
                       {"relation_pairs", {m.relation_forward, m.relation_backward}},
                       {"seconds", m.seconds}});
  json j = {{"schema", 1}, {"k", k}, {"j", cfg.j}, {"equivalent", rep.equivalent}, {"members", members}, {"seconds", rep.seconds}};
  std::cout << j.dump(2) << "\n";
  return rep.equivalent ? kOk : kFails;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wnet: probabilistic broadcast networks"};
  Globals g;
  app.add_option("--tol", g.tol, "numeric tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-states", g.max_states, "state space bound");
  app.add_option("--inputs", g.inputs, "input values, as v1,v2@node");
  app.add_option("--seed", g.seed, "seed for generated tests");
  app.add_flag("--json", g.json, "machine-readable output");
  app.require_subcommand(1);

  std::string a, b, out, witness, topology, values;
  std::vector<std::string> test_refs;
  bool dot = false, as_json = false, mutate = false;
  long bound = 1000000;
  int generate = 0, k = 1;

  auto* wf = app.add_subcommand("wf", "check well-formedness");
  wf->add_option("net", a)->required();
  auto* lts = app.add_subcommand("lts", "explore the extensional transition system");
  lts->add_option("net", a)->required();
  lts->add_flag("--dot", dot);
  lts->add_flag("--json-out", as_json);
  auto* compose = app.add_subcommand("compose", "extend the first network with the second");
  compose->add_option("left", a)->required();
  compose->add_option("right", b)->required();
  compose->add_option("-o,--output", out);
  auto* results = app.add_subcommand("results", "success probability bounds");
  results->add_option("net", a)->required();
  results->add_option("--bound", bound, "iteration bound");
  auto* rmay = app.add_subcommand("refute-may", "search for a test refuting the may preorder");
  auto* rmust = app.add_subcommand("refute-must", "search for a test refuting the must preorder");
  for (auto* c : {rmay, rmust}) {
    c->add_option("left", a)->required();
    c->add_option("right", b)->required();
    c->add_option("--tests", test_refs);
    c->add_option("--generate", generate, "number of random tests to add");
  }
  auto* sim = app.add_subcommand("sim", "simulation check");
  auto* dsim = app.add_subcommand("dsim", "divergence-free deadlock simulation check");
  for (auto* c : {sim, dsim}) {
    c->add_option("left", a)->required();
    c->add_option("right", b)->required();
    c->add_option("--witness", witness, "write the relation as JSON (- for stdout)");
  }
  auto* routing = app.add_subcommand("routing", "routing protocol against its specification");
  routing->add_option("--k", k)->required();
  routing->add_option("--topology", topology)->required();
  routing->add_option("--values", values);
  routing->add_flag("--mutate", mutate, "drop the broadcast of n2");

  for (auto* c : app.get_subcommands({})) c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  default_state_bound() = g.max_states;
  global_tolerance() = g.tol;

  try {
    if (wf->parsed()) return cmd_wf(g, a);
    if (lts->parsed()) return cmd_lts(g, a, dot, as_json);
    if (compose->parsed()) return cmd_compose(g, a, b, out);
    if (results->parsed()) return cmd_results(g, a, bound);
    if (rmay->parsed()) return cmd_refute(g, TestMode::May, a, b, test_refs, generate);
    if (rmust->parsed()) return cmd_refute(g, TestMode::Must, a, b, test_refs, generate);
    if (sim->parsed()) return cmd_sim(g, false, a, b, witness);
    if (dsim->parsed()) return cmd_sim(g, true, a, b, witness);
    if (routing->parsed()) return cmd_routing(g, k, topology, values, mutate);
  } catch (const ParseError& e) {
    std::cerr << "parse error at " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const InvalidTopology& e) {
    std::cerr << e.what() << "\n";
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
