#include "wnet/term.hpp"

#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace wnet {

std::string Value::str() const {
  switch (kind) {
    case Kind::Int: return std::to_string(num);
    case Kind::Bool: return num ? "true" : "false";
    case Kind::Name: return name;
  }
  return {};
}

namespace {

struct Interner {
  std::mutex mu;
  std::unordered_map<std::string, const Term*> table;
  std::deque<Term> store;
};

Interner& interner() {
  static Interner in;
  return in;
}

void put_u32(std::string& k, std::uint32_t v) { k.append(reinterpret_cast<const char*>(&v), sizeof v); }

std::string key_of(const Term& t) {
  std::string k;
  k.push_back(static_cast<char>(t.kind));
  switch (t.kind) {
    case TermKind::Lit:
      k.push_back(static_cast<char>(t.lit.kind));
      k.append(reinterpret_cast<const char*>(&t.lit.num), sizeof t.lit.num);
      k += t.lit.name;
      break;
    case TermKind::Var: put_u32(k, static_cast<std::uint32_t>(t.index)); break;
    case TermKind::Bin: k.push_back(static_cast<char>(t.op)); break;
    case TermKind::Choice: {
      char buf[sizeof(double)];
      std::memcpy(buf, &t.prob, sizeof buf);
      k.append(buf, sizeof buf);
      break;
    }
    default: break;
  }
  put_u32(k, static_cast<std::uint32_t>(t.name.size()));
  k += t.name;
  for (auto* c : t.kids) put_u32(k, c->id);
  return k;
}

TermRef intern(Term t) {
  for (auto* c : t.kids) {
    t.free_depth = std::max(t.free_depth, c->free_depth);
    t.has_call = t.has_call || c->has_call;
  }
  if (t.kind == TermKind::Var) t.free_depth = t.index + 1;
  if (t.kind == TermKind::Recv) t.free_depth = std::max(0, t.kids[0]->free_depth - 1);
  if (t.kind == TermKind::Call) t.has_call = true;
  std::string key = key_of(t);
  auto& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  auto it = in.table.find(key);
  if (it != in.table.end()) return it->second;
  t.id = static_cast<std::uint32_t>(in.store.size());
  in.store.push_back(std::move(t));
  const Term* p = &in.store.back();
  in.table.emplace(std::move(key), p);
  return p;
}

Term node(TermKind k) {
  Term t{};
  t.kind = k;
  return t;
}

void need_state(TermRef t) {
  if (!t->is_state()) throw std::invalid_argument("expected a state term");
}
void need_expr(TermRef t) {
  if (!t->is_expr()) throw std::invalid_argument("expected an expression term");
}

}  // namespace

std::size_t term_count() {
  auto& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  return in.store.size();
}

namespace mk {

TermRef lit(Value v) {
  Term t = node(TermKind::Lit);
  t.lit = std::move(v);
  return intern(std::move(t));
}

TermRef num(std::int64_t v) { return lit(Value::integer(v)); }

TermRef var(int index) {
  Term t = node(TermKind::Var);
  t.index = index;
  return intern(std::move(t));
}

TermRef bin(BinOp op, TermRef a, TermRef b) {
  need_expr(a);
  need_expr(b);
  Term t = node(TermKind::Bin);
  t.op = op;
  t.kids = {a, b};
  return intern(std::move(t));
}

TermRef bcast(const std::string& chan, TermRef expr, TermRef p) {
  need_expr(expr);
  Term t = node(TermKind::Bcast);
  t.name = chan;
  t.kids = {expr, proc(p)};
  return intern(std::move(t));
}

TermRef recv(const std::string& chan, const std::string& hint, TermRef p) {
  Term t = node(TermKind::Recv);
  t.name = chan;
  t.hint = hint.empty() ? "x" : hint;
  t.kids = {proc(p)};
  return intern(std::move(t));
}

TermRef omega() { return intern(node(TermKind::Omega)); }
TermRef nil() { return intern(node(TermKind::Nil)); }

TermRef sum(TermRef a, TermRef b) {
  need_state(a);
  need_state(b);
  Term t = node(TermKind::Sum);
  t.kids = {a, b};
  return intern(std::move(t));
}

TermRef match(TermRef guard, TermRef then_s, TermRef else_s) {
  need_expr(guard);
  need_state(then_s);
  need_state(else_s);
  Term t = node(TermKind::Match);
  t.kids = {guard, then_s, else_s};
  return intern(std::move(t));
}

TermRef tau(TermRef p) {
  Term t = node(TermKind::Tau);
  t.kids = {proc(p)};
  return intern(std::move(t));
}

TermRef call(const std::string& name, std::vector<TermRef> args) {
  for (auto* a : args) need_expr(a);
  Term t = node(TermKind::Call);
  t.name = name;
  t.kids = std::move(args);
  return intern(std::move(t));
}

TermRef leaf(TermRef state) {
  need_state(state);
  Term t = node(TermKind::Leaf);
  t.kids = {state};
  return intern(std::move(t));
}

TermRef choice(TermRef left, double p, TermRef right) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("choice probability must lie strictly between 0 and 1");
  Term t = node(TermKind::Choice);
  t.prob = p;
  t.kids = {proc(left), proc(right)};
  return intern(std::move(t));
}

TermRef proc(TermRef t) {
  if (t->is_proc()) return t;
  return leaf(t);
}

}  // namespace mk

Value eval(TermRef e) {
  switch (e->kind) {
    case TermKind::Lit: return e->lit;
    case TermKind::Var: throw EvalError("free variable in evaluated expression");
    case TermKind::Bin: {
      Value a = eval(e->kids[0]);
      Value b = eval(e->kids[1]);
      switch (e->op) {
        case BinOp::Eq: return Value::boolean(a == b);
        case BinOp::Le:
          if (!a.is_int() || !b.is_int()) throw EvalError("<= expects integers");
          return Value::boolean(a.num <= b.num);
        default: break;
      }
      if (!a.is_int() || !b.is_int()) throw EvalError("arithmetic expects integers");
      switch (e->op) {
        case BinOp::Add: return Value::integer(a.num + b.num);
        case BinOp::Sub: return Value::integer(a.num - b.num);
        case BinOp::Mul: return Value::integer(a.num * b.num);
        default: break;
      }
      break;
    }
    default: break;
  }
  throw EvalError("not an expression");
}

namespace {

TermRef subst_at(TermRef t, const std::vector<Value>& vals, int depth) {
  if (t->free_depth <= depth) return t;
  switch (t->kind) {
    case TermKind::Var: {
      int k = t->index - depth;
      if (k < static_cast<int>(vals.size())) return mk::lit(vals[static_cast<std::size_t>(k)]);
      return mk::var(t->index - static_cast<int>(vals.size()));
    }
    case TermKind::Bin: return mk::bin(t->op, subst_at(t->kids[0], vals, depth), subst_at(t->kids[1], vals, depth));
    case TermKind::Bcast:
      return mk::bcast(t->name, subst_at(t->kids[0], vals, depth), subst_at(t->kids[1], vals, depth));
    case TermKind::Recv: return mk::recv(t->name, t->hint, subst_at(t->kids[0], vals, depth + 1));
    case TermKind::Sum: return mk::sum(subst_at(t->kids[0], vals, depth), subst_at(t->kids[1], vals, depth));
    case TermKind::Match:
      return mk::match(subst_at(t->kids[0], vals, depth), subst_at(t->kids[1], vals, depth),
                       subst_at(t->kids[2], vals, depth));
    case TermKind::Tau: return mk::tau(subst_at(t->kids[0], vals, depth));
    case TermKind::Call: {
      std::vector<TermRef> args;
      for (auto* a : t->kids) args.push_back(subst_at(a, vals, depth));
      return mk::call(t->name, std::move(args));
    }
    case TermKind::Leaf: return mk::leaf(subst_at(t->kids[0], vals, depth));
    case TermKind::Choice:
      return mk::choice(subst_at(t->kids[0], vals, depth), t->prob, subst_at(t->kids[1], vals, depth));
    default: return t;
  }
}

TermRef fold_expr(TermRef e) {
  if (e->kind == TermKind::Lit) return e;
  if (e->closed()) {
    try {
      return mk::lit(eval(e));
    } catch (const EvalError&) {
      return e;
    }
  }
  if (e->kind == TermKind::Bin) return mk::bin(e->op, fold_expr(e->kids[0]), fold_expr(e->kids[1]));
  return e;
}

}  // namespace

TermRef subst(TermRef t, const std::vector<Value>& vals) { return subst_at(t, vals, 0); }

TermRef normalize(TermRef t) {
  static thread_local std::unordered_map<std::uint32_t, TermRef> memo;
  auto it = memo.find(t->id);
  if (it != memo.end()) return it->second;
  TermRef r = t;
  switch (t->kind) {
    case TermKind::Lit:
    case TermKind::Var:
    case TermKind::Bin: r = fold_expr(t); break;
    case TermKind::Bcast: r = mk::bcast(t->name, normalize(t->kids[0]), normalize(t->kids[1])); break;
    case TermKind::Recv: r = mk::recv(t->name, t->hint, normalize(t->kids[0])); break;
    case TermKind::Sum: r = mk::sum(normalize(t->kids[0]), normalize(t->kids[1])); break;
    case TermKind::Match: {
      TermRef g = normalize(t->kids[0]);
      if (g->kind == TermKind::Lit && g->lit.is_bool()) {
        r = normalize(g->lit.truth() ? t->kids[1] : t->kids[2]);
      } else {
        r = mk::match(g, normalize(t->kids[1]), normalize(t->kids[2]));
      }
      break;
    }
    case TermKind::Tau: r = mk::tau(normalize(t->kids[0])); break;
    case TermKind::Call: {
      std::vector<TermRef> args;
      for (auto* a : t->kids) args.push_back(normalize(a));
      r = mk::call(t->name, std::move(args));
      break;
    }
    case TermKind::Leaf: r = mk::leaf(normalize(t->kids[0])); break;
    case TermKind::Choice: r = mk::choice(normalize(t->kids[0]), t->prob, normalize(t->kids[1])); break;
    default: break;
  }
  memo.emplace(t->id, r);
  return r;
}

}  // namespace wnet
