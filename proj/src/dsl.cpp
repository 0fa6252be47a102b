#include "wnet/dsl.hpp"

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace wnet {

namespace {

enum class Tok { Ident, Int, Dec, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  static const char* syms[] = {"<->", "->", "<=", "!", "?", "<", ">", "(", ")", "{", "}", ";", ":", ",",
                               ".",   "+",  "-",  "*", "=", "|", "#"};
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\'')) ++j;
      out.push_back({Tok::Ident, src.substr(i, j - i), l, cl});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      Tok k = Tok::Int;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
          std::size_t e = j + 1;
          if (e < src.size() && (src[e] == '-' || src[e] == '+')) ++e;
          if (e < src.size() && std::isdigit(static_cast<unsigned char>(src[e]))) {
            j = e;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
          }
        }
        k = Tok::Dec;
      }
      out.push_back({k, src.substr(i, j - i), l, cl});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* s : syms) {
      std::size_t n = std::strlen(s);
      if (src.compare(i, n, s) == 0) {
        out.push_back({Tok::Sym, s, l, cl});
        advance(n);
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(l, cl, "a token");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {"omega", "nil", "tau", "if", "then", "else", "true",
                                          "false", "net", "nodes", "edges", "def", "at"};
  return k;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  NetFile file() {
    NetFile f;
    while (!at_end()) {
      if (is_ident("def")) {
        auto [name, d] = definition();
        if (f.shared.count(name)) fail("a fresh definition name");
        f.shared.emplace(name, std::move(d));
      } else if (is_ident("net")) {
        net(f);
      } else {
        fail("'net' or 'def'");
      }
    }
    return f;
  }

  TermRef lone_proc() {
    TermRef p = proc();
    if (!at_end()) fail("end of input");
    return p;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(peek().line, peek().col, what); }
  bool is_sym(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  bool is_ident(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }
  void expect_sym(const char* s) {
    if (!is_sym(s)) fail(std::string("'") + s + "'");
    ++pos_;
  }
  void expect_kw(const char* s) {
    if (!is_ident(s)) fail(std::string("'") + s + "'");
    ++pos_;
  }
  std::string ident(const char* what = "an identifier") {
    if (peek().kind != Tok::Ident || keywords().count(peek().text)) fail(what);
    return toks_[pos_++].text;
  }

  void net(NetFile& f) {
    expect_kw("net");
    std::string name = ident("a network name");
    if (f.nets.count(name)) fail("a fresh network name");
    expect_sym("{");
    Network n;
    auto env = std::make_shared<DefEnv>();
    std::map<std::string, Definition> local;
    std::vector<std::pair<std::string, TermRef>> placed;
    while (!is_sym("}")) {
      if (is_ident("nodes")) {
        ++pos_;
        expect_sym(":");
        if (!is_sym(";")) {
          n.graph.add_vertex(ident("a node name"));
          while (is_sym(",")) {
            ++pos_;
            n.graph.add_vertex(ident("a node name"));
          }
        }
        expect_sym(";");
      } else if (is_ident("edges")) {
        ++pos_;
        expect_sym(":");
        if (!is_sym(";")) {
          edge(n.graph);
          while (is_sym(",")) {
            ++pos_;
            edge(n.graph);
          }
        }
        expect_sym(";");
      } else if (is_ident("def")) {
        auto [dn, d] = definition();
        if (local.count(dn)) fail("a fresh definition name");
        local.emplace(dn, std::move(d));
      } else if (is_ident("at")) {
        ++pos_;
        int l = peek().line, c = peek().col;
        std::string node = ident("a node name");
        expect_sym(":");
        TermRef s = state();
        expect_sym(";");
        for (const auto& [v, t] : placed)
          if (v == node) throw ParseError(l, c, "a node without code");
        n.graph.add_vertex(node);
        placed.emplace_back(node, s);
      } else {
        fail("'nodes', 'edges', 'def', 'at' or '}'");
      }
    }
    int l = peek().line, c = peek().col;
    expect_sym("}");
    for (const auto& [dn, d] : f.shared)
      if (!local.count(dn)) env->define(dn, d);
    for (auto& [dn, d] : local) env->define(dn, std::move(d));
    n.defs = env;
    SystemTerm st = SystemTerm::nil();
    for (const auto& [v, s] : placed) st = SystemTerm::par(st, SystemTerm::located(v, s));
    try {
      n.system = flatten(st);
      validate(n);
    } catch (const std::exception& e) {
      throw ParseError(l, c, std::string("a valid network (") + e.what() + ")");
    }
    f.order.push_back(name);
    f.nets.emplace(name, std::move(n));
  }

  void edge(Graph& g) {
    int l = peek().line, c = peek().col;
    std::string a = ident("a node name");
    bool both = false;
    if (is_sym("<->")) {
      both = true;
      ++pos_;
    } else {
      expect_sym("->");
    }
    std::string b = ident("a node name");
    if (a == b) throw ParseError(l, c, "an edge between distinct nodes");
    g.add_vertex(a);
    g.add_vertex(b);
    g.add_edge(a, b);
    if (both) g.add_edge(b, a);
  }

  std::pair<std::string, Definition> definition() {
    expect_kw("def");
    std::string name = ident("a definition name");
    Definition d;
    if (is_sym("(")) {
      ++pos_;
      if (!is_sym(")")) {
        d.params.push_back(ident("a parameter name"));
        while (is_sym(",")) {
          ++pos_;
          d.params.push_back(ident("a parameter name"));
        }
      }
      expect_sym(")");
    }
    expect_sym("=");
    scope_ = d.params;
    d.body = state();
    scope_.clear();
    expect_sym(";");
    return {name, std::move(d)};
  }

  // PROC ::= SUM ( |p| SUM )*
  TermRef proc() {
    TermRef left = operand();
    while (is_sym("|")) {
      ++pos_;
      if (peek().kind != Tok::Dec && peek().kind != Tok::Int) fail("a probability");
      double p = std::strtod(peek().text.c_str(), nullptr);
      if (!(p > 0.0 && p < 1.0)) fail("a probability strictly between 0 and 1");
      ++pos_;
      expect_sym("|");
      TermRef right = operand();
      left = mk::choice(left, p, right);
    }
    return left;
  }

  TermRef state() {
    TermRef s = sum();
    return s;
  }

  // A parenthesised choice may stand as an operand of another choice.
  TermRef operand() {
    if (!is_sym("(")) return mk::proc(sum());
    ++pos_;
    TermRef p = proc();
    expect_sym(")");
    if (p->kind == TermKind::Leaf) return mk::proc(sum_from(p->kids[0]));
    if (is_sym("+")) fail("a state, not a probabilistic choice");
    return p;
  }

  TermRef sum() { return sum_from(unary()); }

  TermRef sum_from(TermRef left) {
    while (is_sym("+")) {
      ++pos_;
      left = mk::sum(left, unary());
    }
    return left;
  }

  // Body of a prefix: a unary state, or a parenthesised process.
  TermRef body() {
    if (is_sym("(")) {
      ++pos_;
      TermRef p = proc();
      expect_sym(")");
      return p;
    }
    return unary();
  }

  TermRef unary() {
    const Token& t = peek();
    if (is_sym("(")) {
      ++pos_;
      TermRef p = proc();
      expect_sym(")");
      if (p->kind != TermKind::Leaf) fail("a state, not a probabilistic choice");
      return p->kids[0];
    }
    if (t.kind != Tok::Ident) fail("a state");
    if (t.text == "omega") {
      ++pos_;
      return mk::omega();
    }
    if (t.text == "nil") {
      ++pos_;
      return mk::nil();
    }
    if (t.text == "tau") {
      ++pos_;
      expect_sym(".");
      return mk::tau(body());
    }
    if (t.text == "if") {
      ++pos_;
      TermRef g = expr();
      expect_kw("then");
      TermRef a = unary();
      expect_kw("else");
      TermRef b = unary();
      return mk::match(g, a, b);
    }
    std::string name = ident("a state");
    if (is_sym("!")) {
      ++pos_;
      expect_sym("<");
      TermRef e = expr();
      expect_sym(">");
      expect_sym(".");
      return mk::bcast(name, e, body());
    }
    if (is_sym("?")) {
      ++pos_;
      expect_sym("(");
      std::string x = ident("a binder name");
      expect_sym(")");
      expect_sym(".");
      scope_.push_back(x);
      TermRef p = body();
      scope_.pop_back();
      return mk::recv(name, x, p);
    }
    std::vector<TermRef> args;
    if (is_sym("(")) {
      ++pos_;
      if (!is_sym(")")) {
        args.push_back(expr());
        while (is_sym(",")) {
          ++pos_;
          args.push_back(expr());
        }
      }
      expect_sym(")");
    }
    return mk::call(name, std::move(args));
  }

  TermRef expr() {
    TermRef a = additive();
    if (is_sym("=")) {
      ++pos_;
      return mk::bin(BinOp::Eq, a, additive());
    }
    if (is_sym("<=")) {
      ++pos_;
      return mk::bin(BinOp::Le, a, additive());
    }
    return a;
  }

  TermRef additive() {
    TermRef a = multiplicative();
    while (is_sym("+") || is_sym("-")) {
      BinOp op = is_sym("+") ? BinOp::Add : BinOp::Sub;
      ++pos_;
      a = mk::bin(op, a, multiplicative());
    }
    return a;
  }

  TermRef multiplicative() {
    TermRef a = atom();
    while (is_sym("*")) {
      ++pos_;
      a = mk::bin(BinOp::Mul, a, atom());
    }
    return a;
  }

  TermRef atom() {
    const Token& t = peek();
    if (is_sym("(")) {
      ++pos_;
      TermRef e = expr();
      expect_sym(")");
      return e;
    }
    if (is_sym("-") && peek(1).kind == Tok::Int) {
      ++pos_;
      return mk::num(-std::stoll(toks_[pos_++].text));
    }
    if (t.kind == Tok::Int) {
      ++pos_;
      return mk::num(std::stoll(t.text));
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "true" || t.text == "false") {
        ++pos_;
        return mk::lit(Value::boolean(t.text == "true"));
      }
      std::string name = ident("an expression");
      for (std::size_t k = scope_.size(); k-- > 0;)
        if (scope_[k] == name) return mk::var(static_cast<int>(scope_.size() - 1 - k));
      return mk::lit(Value::symbol(name));
    }
    fail("an expression");
  }
};

std::string prob_str(double p) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, p);
    if (std::strtod(buf, nullptr) == p) break;
  }
  std::string s = buf;
  if (s.find('e') != std::string::npos || s.find('.') == std::string::npos) {
    std::snprintf(buf, sizeof buf, "%.17f", p);
    s = buf;
    while (s.size() > 3 && s.back() == '0') s.pop_back();
  }
  return s;
}

void collect_names(TermRef t, std::set<std::string>& out) {
  if (t->kind == TermKind::Lit && t->lit.kind == Value::Kind::Name) out.insert(t->lit.name);
  for (auto* k : t->kids) collect_names(k, out);
}

class Printer {
 public:
  explicit Printer(std::vector<std::string> scope, std::set<std::string> avoid)
      : scope_(std::move(scope)), avoid_(std::move(avoid)) {}

  std::string expr(TermRef e, bool nested = false) {
    switch (e->kind) {
      case TermKind::Lit: return e->lit.str();
      case TermKind::Var: {
        auto i = static_cast<std::size_t>(e->index);
        if (i < scope_.size()) return scope_[scope_.size() - 1 - i];
        return "_" + std::to_string(e->index);
      }
      case TermKind::Bin: {
        static const char* ops[] = {" + ", " - ", " * ", " = ", " <= "};
        std::string s = expr(e->kids[0], true) + ops[static_cast<int>(e->op)] + expr(e->kids[1], true);
        return nested ? "(" + s + ")" : s;
      }
      default: throw std::logic_error("not an expression");
    }
  }

  // level 0: sum position, 1: unary position
  std::string state(TermRef s, int level) {
    switch (s->kind) {
      case TermKind::Omega: return "omega";
      case TermKind::Nil: return "nil";
      case TermKind::Tau: return "tau." + body(s->kids[0]);
      case TermKind::Bcast: return s->name + "!<" + expr(s->kids[0]) + ">." + body(s->kids[1]);
      case TermKind::Recv: {
        std::string x = fresh(s->hint);
        scope_.push_back(x);
        std::string r = s->name + "?(" + x + ")." + body(s->kids[0]);
        scope_.pop_back();
        return r;
      }
      case TermKind::Sum: {
        std::string r = state(s->kids[0], 0) + " + " + state(s->kids[1], 1);
        return level > 0 ? "(" + r + ")" : r;
      }
      case TermKind::Match:
        return "if " + expr(s->kids[0]) + " then " + state(s->kids[1], 1) + " else " + state(s->kids[2], 1);
      case TermKind::Call: {
        std::string r = s->name;
        if (!s->kids.empty()) {
          r += "(";
          for (std::size_t i = 0; i < s->kids.size(); ++i) r += (i ? ", " : "") + expr(s->kids[i]);
          r += ")";
        }
        return r;
      }
      default: throw std::logic_error("not a state");
    }
  }

  std::string proc(TermRef p, bool right_operand = false) {
    if (p->kind == TermKind::Leaf) return state(p->kids[0], 0);
    std::string r = proc(p->kids[0]) + " |" + prob_str(p->prob) + "| " + proc(p->kids[1], true);
    return right_operand ? "(" + r + ")" : r;
  }

 private:
  std::vector<std::string> scope_;
  std::set<std::string> avoid_;

  std::string body(TermRef p) {
    if (p->kind == TermKind::Leaf) {
      TermRef s = p->kids[0];
      if (s->kind == TermKind::Sum) return "(" + state(s, 0) + ")";
      return state(s, 1);
    }
    return "(" + proc(p) + ")";
  }

  std::string fresh(const std::string& hint) {
    auto taken = [&](const std::string& x) {
      if (keywords().count(x) || avoid_.count(x)) return true;
      for (const auto& y : scope_)
        if (y == x) return true;
      return false;
    };
    if (!taken(hint)) return hint;
    for (int k = 1;; ++k) {
      std::string x = hint + std::to_string(k);
      if (!taken(x)) return x;
    }
  }
};

}  // namespace

const Network& NetFile::get(const std::string& name) const {
  auto it = nets.find(name);
  if (it == nets.end()) throw std::runtime_error("no network named " + name);
  return it->second;
}

NetFile parse_netfile(const std::string& text) {
  Parser p(text);
  return p.file();
}

NetFile load_netfile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_netfile(ss.str());
}

TermRef parse_proc(const std::string& text) {
  Parser p(text);
  return p.lone_proc();
}

TermRef parse_state(const std::string& text) {
  TermRef p = parse_proc(text);
  if (p->kind != TermKind::Leaf) throw ParseError(1, 1, "a state, not a probabilistic choice");
  return p->kids[0];
}

Network resolve_network(const std::string& ref) {
  auto hash = ref.rfind('#');
  std::string path = hash == std::string::npos ? ref : ref.substr(0, hash);
  NetFile f = load_netfile(path);
  if (hash == std::string::npos) {
    if (f.order.size() != 1) throw std::runtime_error(path + " holds " + std::to_string(f.order.size()) + " networks; name one with #");
    return f.get(f.order[0]);
  }
  return f.get(ref.substr(hash + 1));
}

std::string print_expr(TermRef e, const std::vector<std::string>& scope) {
  std::set<std::string> avoid;
  collect_names(e, avoid);
  return Printer(scope, avoid).expr(e);
}

std::string print_state(TermRef s, const std::vector<std::string>& scope) {
  std::set<std::string> avoid;
  collect_names(s, avoid);
  return Printer(scope, avoid).state(s, 0);
}

std::string print_proc(TermRef p, const std::vector<std::string>& scope) {
  std::set<std::string> avoid;
  collect_names(p, avoid);
  return Printer(scope, avoid).proc(p);
}

std::string print_system(const System& s) {
  if (s.nodes.empty()) return "0";
  std::string r;
  for (const auto& [n, t] : s.nodes) {
    if (!r.empty()) r += " | ";
    r += n + "[" + print_state(t) + "]";
  }
  return r;
}

std::string print_network(const std::string& name, const Network& n) {
  std::ostringstream os;
  os << "net " << name << " {\n  nodes: ";
  bool first = true;
  for (const auto& v : n.graph.vertices) {
    os << (first ? "" : ", ") << v;
    first = false;
  }
  os << ";\n  edges: ";
  first = true;
  for (const auto& [a, b] : n.graph.edges) {
    if (n.graph.has_edge(b, a) && b < a) continue;
    os << (first ? "" : ", ") << a << (n.graph.has_edge(b, a) ? " <-> " : " -> ") << b;
    first = false;
  }
  os << ";\n";
  for (const auto& [dn, d] : n.defs->all()) {
    os << "  def " << dn;
    if (!d.params.empty()) {
      os << "(";
      for (std::size_t i = 0; i < d.params.size(); ++i) os << (i ? ", " : "") << d.params[i];
      os << ")";
    }
    os << " = " << print_state(d.body, d.params) << ";\n";
  }
  for (const auto& [v, s] : n.system.nodes) os << "  at " << v << ": " << print_state(s) << ";\n";
  os << "}\n";
  return os.str();
}

std::string print_netfile(const NetFile& f) {
  std::string out;
  for (const auto& name : f.order) {
    if (!out.empty()) out += "\n";
    out += print_network(name, f.get(name));
  }
  return out;
}

std::string network_to_dot(const Network& n) {
  std::ostringstream os;
  os << "digraph network {\n";
  for (const auto& v : n.graph.vertices) {
    TermRef s = n.system.at(v);
    if (s) {
      std::string label = v + ": " + print_state(s);
      std::string esc;
      for (char ch : label) {
        if (ch == '"' || ch == '\\') esc.push_back('\\');
        esc.push_back(ch);
      }
      os << "  \"" << v << "\" [shape=box, style=filled, fillcolor=lightgray, label=\"" << esc << "\"];\n";
    } else {
      os << "  \"" << v << "\" [shape=ellipse];\n";
    }
  }
  for (const auto& [a, b] : n.graph.edges) os << "  \"" << a << "\" -> \"" << b << "\";\n";
  os << "}\n";
  return os.str();
}

}  // namespace wnet
