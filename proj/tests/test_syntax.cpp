#include "doctest.h"
#include "support.hpp"
#include "wnet/syntax.hpp"

using namespace wnet;

TEST_CASE("terms are hash-consed and binder hints do not matter") {
  TermRef a = mk::recv("c", "x", mk::proc(mk::bcast("d", mk::var(0), mk::proc(mk::nil()))));
  TermRef b = mk::recv("c", "y", mk::proc(mk::bcast("d", mk::var(0), mk::proc(mk::nil()))));
  CHECK(a == b);
  CHECK(a->closed());
  CHECK(mk::var(0)->free_depth == 1);
  CHECK(mk::num(3) == mk::lit(Value::integer(3)));
  CHECK(mk::num(3) != mk::lit(Value::symbol("3")));
}

TEST_CASE("evaluation and normalisation") {
  CHECK(eval(mk::bin(BinOp::Add, mk::num(2), mk::bin(BinOp::Mul, mk::num(3), mk::num(4)))) == Value::integer(14));
  CHECK(eval(mk::bin(BinOp::Le, mk::num(2), mk::num(1))) == Value::boolean(false));
  CHECK(eval(mk::bin(BinOp::Eq, mk::lit(Value::symbol("v")), mk::lit(Value::symbol("v")))) == Value::boolean(true));
  CHECK_THROWS_AS(eval(mk::bin(BinOp::Add, mk::num(1), mk::lit(Value::symbol("v")))), EvalError);
  CHECK_THROWS_AS(eval(mk::var(0)), EvalError);

  TermRef m = mk::match(mk::bin(BinOp::Eq, mk::num(1), mk::num(1)), mk::omega(), mk::nil());
  CHECK(normalize(m) == mk::omega());
  TermRef open = mk::match(mk::bin(BinOp::Eq, mk::var(0), mk::num(1)), mk::omega(), mk::nil());
  CHECK(normalize(open) == open);
  CHECK(normalize(subst(open, {Value::integer(1)})) == mk::omega());
  CHECK(normalize(subst(open, {Value::integer(2)})) == mk::nil());
}

TEST_CASE("substitution respects binders") {
  // c?(y).d!<x + y>  with x free at index 0 outside the binder
  TermRef body = mk::bcast("d", mk::bin(BinOp::Add, mk::var(1), mk::var(0)), mk::proc(mk::nil()));
  TermRef s = mk::recv("c", "y", mk::proc(body));
  TermRef r = subst(s, {Value::integer(5)});
  CHECK(r->closed());
  TermRef expect = mk::recv("c", "y", mk::proc(mk::bcast("d", mk::bin(BinOp::Add, mk::num(5), mk::var(0)), mk::proc(mk::nil()))));
  CHECK(r == expect);
}

TEST_CASE("process interpretation multiplies probabilities") {
  TermRef p = mk::choice(mk::omega(), 0.5, mk::choice(mk::nil(), 0.5, mk::omega()));
  StateDist d = interpret(p);
  CHECK(d.size() == 2);
  CHECK(d.weight(mk::omega()) == doctest::Approx(0.75));
  CHECK(d.weight(mk::nil()) == doctest::Approx(0.25));
  CHECK(interpret(mk::nil()).is_point());
}

TEST_CASE("definitions unfold with parameters in order") {
  DefEnv env;
  // A(x, y) = c!<x - y>.nil ; the last parameter is the innermost binder
  env.define("A", {{"x", "y"}, mk::bcast("c", mk::bin(BinOp::Sub, mk::var(1), mk::var(0)), mk::proc(mk::nil()))});
  TermRef u = env.unfold(mk::call("A", {mk::num(7), mk::num(2)}));
  CHECK(u == mk::bcast("c", mk::num(5), mk::proc(mk::nil())));
  CHECK_THROWS_AS(env.unfold(mk::call("B", {})), UnboundDefinition);
  CHECK_THROWS(env.unfold(mk::call("A", {mk::num(1)})));
  CHECK_THROWS(env.define("C", {{}, mk::bcast("c", mk::var(0), mk::proc(mk::nil()))}));
}

TEST_CASE("merging definition tables") {
  auto a = std::make_shared<DefEnv>();
  auto b = std::make_shared<DefEnv>();
  auto c = std::make_shared<DefEnv>();
  a->define("X", {{}, mk::nil()});
  b->define("X", {{}, mk::nil()});
  b->define("Y", {{}, mk::omega()});
  c->define("X", {{}, mk::omega()});
  auto ab = DefEnv::merge(a, b);
  CHECK(ab->find("X"));
  CHECK(ab->find("Y"));
  CHECK_THROWS_AS(DefEnv::merge(a, c), DefinitionConflict);
}

TEST_CASE("structural congruence of systems") {
  auto at = [](const char* n, TermRef s) { return SystemTerm::located(n, s); };
  SystemTerm x = SystemTerm::par(at("a", mk::nil()), SystemTerm::par(at("b", mk::omega()), SystemTerm::nil()));
  SystemTerm y = SystemTerm::par(SystemTerm::par(at("b", mk::omega()), at("a", mk::nil())), SystemTerm::nil());
  SystemTerm z = SystemTerm::par(at("a", mk::omega()), at("b", mk::nil()));
  CHECK(congruent(x, y));
  CHECK_FALSE(congruent(x, z));
  System f = flatten(x);
  REQUIRE(f.nodes.size() == 2);
  CHECK(f.nodes[0].first == "a");
  CHECK(f.at("b") == mk::omega());
  CHECK(f.at("c") == nullptr);
  CHECK(flatten(to_term(f)) == f);
  CHECK(f.with("a", mk::omega()).at("a") == mk::omega());
  CHECK(f.with("c", mk::nil()).names() == std::set<std::string>{"a", "b", "c"});
}

TEST_CASE("validation, well-formedness and interfaces") {
  Network n;
  n.graph.add_vertex("m");
  n.graph.add_vertex("i");
  n.graph.add_vertex("o");
  n.graph.add_edge("i", "m");
  n.graph.add_edge("m", "o");
  n.system = n.system.with("m", mk::nil());
  CHECK_NOTHROW(validate(n));
  CHECK(well_formed(n));
  Interface io = interface(n);
  CHECK(io.in == std::set<std::string>{"i"});
  CHECK(io.out == std::set<std::string>{"o"});
  CHECK(n.externals() == std::set<std::string>{"i", "o"});

  Network loose = n;
  loose.graph.add_vertex("z");
  CHECK_FALSE(well_formed(loose));

  Network ext_edge = n;
  ext_edge.graph.add_edge("i", "o");
  CHECK_FALSE(well_formed(ext_edge));

  Network stray = n;
  stray.system = stray.system.with("q", mk::nil());
  CHECK_THROWS_AS(validate(stray), InvalidNetwork);

  Network loop = n;
  loop.graph.edges.insert({"m", "m"});
  CHECK_THROWS_AS(validate(loop), InvalidNetwork);
}

TEST_CASE("ill-formed fixture is reported") {
  using namespace testsupport;
  CHECK(well_formed(net("wellformed.net", "M")));
  CHECK_FALSE(well_formed(net("wellformed.net", "N")));
}
