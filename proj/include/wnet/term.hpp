#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wnet {

struct Value {
  enum class Kind : std::uint8_t { Int, Bool, Name };
  Kind kind = Kind::Int;
  std::int64_t num = 0;
  std::string name;

  static Value integer(std::int64_t v) { return Value{Kind::Int, v, {}}; }
  static Value boolean(bool b) { return Value{Kind::Bool, b ? 1 : 0, {}}; }
  static Value symbol(std::string s) { return Value{Kind::Name, 0, std::move(s)}; }

  bool is_int() const { return kind == Kind::Int; }
  bool is_bool() const { return kind == Kind::Bool; }
  bool truth() const { return kind == Kind::Bool && num != 0; }
  std::string str() const;

  auto operator<=>(const Value&) const = default;
  bool operator==(const Value&) const = default;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TermKind : std::uint8_t {
  // expressions
  Lit, Var, Bin,
  // states
  Bcast, Recv, Omega, Sum, Match, Tau, Call, Nil,
  // processes
  Leaf, Choice,
};

enum class BinOp : std::uint8_t { Add, Sub, Mul, Eq, Le };

// Hash-consed term node. Variables are de Bruijn indices; the binder name of a
// receive is kept as a printing hint only and does not take part in identity.
struct Term {
  TermKind kind;
  std::uint32_t id;
  Value lit;
  int index = 0;
  BinOp op = BinOp::Add;
  std::string name;
  std::string hint;
  double prob = 0;
  std::vector<const Term*> kids;
  int free_depth = 0;
  bool has_call = false;

  bool closed() const { return free_depth == 0; }
  bool is_expr() const { return kind <= TermKind::Bin; }
  bool is_state() const { return kind >= TermKind::Bcast && kind <= TermKind::Nil; }
  bool is_proc() const { return kind == TermKind::Leaf || kind == TermKind::Choice; }
};

using TermRef = const Term*;

// Ordering by id keeps containers deterministic within one run.
struct TermLess {
  bool operator()(TermRef a, TermRef b) const { return a->id < b->id; }
};

namespace mk {
TermRef lit(Value v);
TermRef num(std::int64_t v);
TermRef var(int index);
TermRef bin(BinOp op, TermRef a, TermRef b);

TermRef bcast(const std::string& chan, TermRef expr, TermRef proc);
TermRef recv(const std::string& chan, const std::string& hint, TermRef proc);
TermRef omega();
TermRef sum(TermRef a, TermRef b);
TermRef match(TermRef guard, TermRef then_s, TermRef else_s);
TermRef tau(TermRef proc);
TermRef call(const std::string& name, std::vector<TermRef> args);
TermRef nil();

TermRef leaf(TermRef state);
TermRef choice(TermRef left, double p, TermRef right);
// Accepts either a state or a process and returns a process.
TermRef proc(TermRef t);
}  // namespace mk

Value eval(TermRef expr);

// Replaces free variables: index i at binder depth d becomes vals[i - d].
TermRef subst(TermRef t, const std::vector<Value>& vals);

// Folds closed expressions to literals and resolves closed match guards.
TermRef normalize(TermRef t);

std::size_t term_count();

}  // namespace wnet
