#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wnet {

inline double& global_tolerance() {
  static double tol = 1e-9;
  return tol;
}

class MassExceeded : public std::runtime_error {
 public:
  explicit MassExceeded(double mass) : std::runtime_error("sub-distribution mass exceeds 1"), mass(mass) {}
  double mass;
};

template <class T, class Less = std::less<T>>
class SubDistribution {
 public:
  using Map = std::map<T, double, Less>;

  SubDistribution() = default;

  static SubDistribution point(const T& x) {
    SubDistribution d;
    d.entries_.emplace(x, 1.0);
    return d;
  }

  // Builds from raw pairs, merging duplicates and dropping non-positive weights.
  static SubDistribution from(const std::vector<std::pair<T, double>>& pairs) {
    SubDistribution d;
    for (const auto& [x, w] : pairs) d.add(x, w);
    d.check_mass();
    return d;
  }

  void add(const T& x, double w) {
    if (!(w > 0)) return;
    entries_[x] += w;
  }

  double mass() const {
    double m = 0;
    for (const auto& [x, w] : entries_) m += w;
    return m;
  }

  double weight(const T& x) const {
    auto it = entries_.find(x);
    return it == entries_.end() ? 0.0 : it->second;
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const Map& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<T> support() const {
    std::vector<T> s;
    for (const auto& [x, w] : entries_) s.push_back(x);
    return s;
  }

  bool is_point() const { return entries_.size() == 1 && std::abs(entries_.begin()->second - 1.0) <= global_tolerance(); }

  SubDistribution scaled(double p) const {
    SubDistribution d;
    for (const auto& [x, w] : entries_) d.add(x, w * p);
    return d;
  }

  bool approx_equal(const SubDistribution& o, double tol = global_tolerance()) const {
    auto a = entries_.begin();
    auto b = o.entries_.begin();
    Less less;
    while (a != entries_.end() || b != o.entries_.end()) {
      if (b == o.entries_.end() || (a != entries_.end() && less(a->first, b->first))) {
        if (a->second > tol) return false;
        ++a;
      } else if (a == entries_.end() || less(b->first, a->first)) {
        if (b->second > tol) return false;
        ++b;
      } else {
        if (std::abs(a->second - b->second) > tol) return false;
        ++a;
        ++b;
      }
    }
    return true;
  }

  void check_mass() const {
    double m = mass();
    if (m > 1.0 + global_tolerance()) throw MassExceeded(m);
  }

 private:
  Map entries_;
};

template <class T, class L>
SubDistribution<T, L> weighted_sum(const std::vector<double>& weights, const std::vector<SubDistribution<T, L>>& dists) {
  if (weights.size() != dists.size()) throw std::invalid_argument("weighted_sum: length mismatch");
  SubDistribution<T, L> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) throw std::invalid_argument("weighted_sum: negative weight");
    for (const auto& [x, w] : dists[i]) out.add(x, weights[i] * w);
  }
  out.check_mass();
  return out;
}

template <class U, class UL = std::less<U>, class T, class L, class F>
SubDistribution<U, UL> map_image(F&& f, const SubDistribution<T, L>& d) {
  SubDistribution<U, UL> out;
  for (const auto& [x, w] : d) out.add(f(x), w);
  return out;
}

template <class U, class UL = std::less<U>, class T1, class L1, class T2, class L2, class F>
SubDistribution<U, UL> product_image(F&& f, const SubDistribution<T1, L1>& a, const SubDistribution<T2, L2>& b) {
  SubDistribution<U, UL> out;
  for (const auto& [x, wx] : a)
    for (const auto& [y, wy] : b) out.add(f(x, y), wx * wy);
  return out;
}

template <class T, class L = std::less<T>>
struct LiftWitness {
  struct Part {
    double weight;
    T left;
    SubDistribution<T, L> right;
  };
  std::vector<Part> parts;

  SubDistribution<T, L> left_side() const {
    SubDistribution<T, L> d;
    for (const auto& p : parts) d.add(p.left, p.weight);
    return d;
  }
  SubDistribution<T, L> right_side() const {
    SubDistribution<T, L> d;
    for (const auto& p : parts)
      for (const auto& [x, w] : p.right) d.add(x, p.weight * w);
    return d;
  }
};

// Max flow on a small dense network with real capacities.
class FlowNetwork {
 public:
  explicit FlowNetwork(int n) : adj_(static_cast<std::size_t>(n)) {}
  int add_edge(int from, int to, double cap);
  double max_flow(int s, int t);
  double flow_on(int edge) const { return edges_[static_cast<std::size_t>(edge)].flow; }

 private:
  struct Edge {
    int to;
    double cap;
    double flow;
  };
  bool bfs(int s, int t);
  double dfs(int v, int t, double pushed);
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> level_, it_;
};

// Feasibility of { x >= 0 : A x = b }. Rows of A are sparse (column, coefficient) lists.
struct LinearSystem {
  int cols = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<double> rhs;
  int add_var() { return cols++; }
  void add_row(std::vector<std::pair<int, double>> row, double b) {
    rows.push_back(std::move(row));
    rhs.push_back(b);
  }
};

std::optional<std::vector<double>> solve_feasible(const LinearSystem& sys, double tol = 1e-9);

// State-to-state lifting: rel holds pairs (a, b) meaning a R b.
template <class T, class L>
std::optional<LiftWitness<T, L>> lift_check(const std::vector<std::pair<T, T>>& rel, const SubDistribution<T, L>& left,
                                            const SubDistribution<T, L>& right) {
  double tol = global_tolerance();
  if (std::abs(left.mass() - right.mass()) > tol) return std::nullopt;
  std::vector<T> ls = left.support();
  std::vector<T> rs = right.support();
  auto index_of = [](const std::vector<T>& v, const T& x) -> int {
    auto it = std::lower_bound(v.begin(), v.end(), x, L{});
    if (it == v.end() || L{}(x, *it)) return -1;
    return static_cast<int>(it - v.begin());
  };
  int n = static_cast<int>(ls.size() + rs.size()) + 2;
  int s = n - 2, t = n - 1;
  FlowNetwork g(n);
  for (std::size_t i = 0; i < ls.size(); ++i) g.add_edge(s, static_cast<int>(i), left.weight(ls[i]));
  for (std::size_t j = 0; j < rs.size(); ++j)
    g.add_edge(static_cast<int>(ls.size() + j), t, right.weight(rs[j]));
  std::vector<std::tuple<int, int, int>> mids;
  for (const auto& [a, b] : rel) {
    int i = index_of(ls, a), j = index_of(rs, b);
    if (i < 0 || j < 0) continue;
    int e = g.add_edge(i, static_cast<int>(ls.size()) + j, 2.0);
    mids.emplace_back(e, i, j);
  }
  double f = g.max_flow(s, t);
  if (std::abs(f - left.mass()) > tol * std::max<std::size_t>(1, ls.size())) return std::nullopt;
  LiftWitness<T, L> w;
  for (auto [e, i, j] : mids) {
    double x = g.flow_on(e);
    if (x > 0) w.parts.push_back({x, ls[static_cast<std::size_t>(i)], SubDistribution<T, L>::point(rs[static_cast<std::size_t>(j)])});
  }
  return w;
}

// State-to-sub-distribution lifting, decided by linear feasibility over the
// weights given to each relation row.
template <class T, class L>
std::optional<LiftWitness<T, L>> lift_check(const std::vector<std::pair<T, SubDistribution<T, L>>>& rel,
                                            const SubDistribution<T, L>& left, const SubDistribution<T, L>& right) {
  double tol = global_tolerance();
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < rel.size(); ++r)
    if (left.weight(rel[r].first) > 0) rows.push_back(r);
  std::map<T, std::vector<std::pair<int, double>>, L> by_left, by_right;
  LinearSystem sys;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    int v = sys.add_var();
    const auto& [a, theta] = rel[rows[k]];
    by_left[a].emplace_back(v, 1.0);
    for (const auto& [b, w] : theta) by_right[b].emplace_back(v, w);
  }
  for (const auto& [a, w] : left) {
    auto it = by_left.find(a);
    if (it == by_left.end()) return std::nullopt;
    sys.add_row(it->second, w);
  }
  for (const auto& [b, w] : right)
    if (!by_right.count(b)) return std::nullopt;
  for (auto& [b, row] : by_right) sys.add_row(row, right.weight(b));
  auto sol = solve_feasible(sys, tol);
  if (!sol) return std::nullopt;
  LiftWitness<T, L> w;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    double x = (*sol)[k];
    if (x > tol * 1e-3) w.parts.push_back({x, rel[rows[k]].first, rel[rows[k]].second});
  }
  return w;
}

}  // namespace wnet
