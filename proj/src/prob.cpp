#include "wnet/prob.hpp"

#include <Eigen/Dense>
#include <limits>
#include <queue>

namespace wnet {

int FlowNetwork::add_edge(int from, int to, double cap) {
  int id = static_cast<int>(edges_.size());
  edges_.push_back({to, cap, 0});
  adj_[static_cast<std::size_t>(from)].push_back(id);
  edges_.push_back({from, 0, 0});
  adj_[static_cast<std::size_t>(to)].push_back(id + 1);
  return id;
}

bool FlowNetwork::bfs(int s, int t) {
  level_.assign(adj_.size(), -1);
  std::queue<int> q;
  level_[static_cast<std::size_t>(s)] = 0;
  q.push(s);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int id : adj_[static_cast<std::size_t>(v)]) {
      const Edge& e = edges_[static_cast<std::size_t>(id)];
      if (e.cap - e.flow > 1e-15 && level_[static_cast<std::size_t>(e.to)] < 0) {
        level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(v)] + 1;
        q.push(e.to);
      }
    }
  }
  return level_[static_cast<std::size_t>(t)] >= 0;
}

double FlowNetwork::dfs(int v, int t, double pushed) {
  if (v == t || pushed <= 0) return pushed;
  auto& ptr = it_[static_cast<std::size_t>(v)];
  const auto& out = adj_[static_cast<std::size_t>(v)];
  for (; ptr < static_cast<int>(out.size()); ++ptr) {
    int id = out[static_cast<std::size_t>(ptr)];
    Edge& e = edges_[static_cast<std::size_t>(id)];
    if (level_[static_cast<std::size_t>(e.to)] != level_[static_cast<std::size_t>(v)] + 1 || e.cap - e.flow <= 1e-15)
      continue;
    double got = dfs(e.to, t, std::min(pushed, e.cap - e.flow));
    if (got > 0) {
      e.flow += got;
      edges_[static_cast<std::size_t>(id ^ 1)].flow -= got;
      return got;
    }
  }
  return 0;
}

double FlowNetwork::max_flow(int s, int t) {
  double total = 0;
  while (bfs(s, t)) {
    it_.assign(adj_.size(), 0);
    while (double f = dfs(s, t, std::numeric_limits<double>::infinity())) total += f;
  }
  return total;
}

std::optional<std::vector<double>> solve_feasible(const LinearSystem& sys, double tol) {
  const int n = sys.cols;
  std::vector<int> live;
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    if (sys.rows[i].empty()) {
      if (std::abs(sys.rhs[i]) > tol) return std::nullopt;
      continue;
    }
    live.push_back(static_cast<int>(i));
  }
  const int m = static_cast<int>(live.size());
  const int width = n + m + 1;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, width);
  for (int r = 0; r < m; ++r) {
    const auto i = static_cast<std::size_t>(live[static_cast<std::size_t>(r)]);
    double sign = sys.rhs[i] < 0 ? -1.0 : 1.0;
    for (auto [c, a] : sys.rows[i]) t(r, c) += sign * a;
    t(r, n + r) = 1.0;
    t(r, width - 1) = sign * sys.rhs[i];
  }
  for (int r = 0; r < m; ++r) {
    t.row(m).head(n) -= t.row(r).head(n);
    t(m, width - 1) -= t(r, width - 1);
  }
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) basis[static_cast<std::size_t>(r)] = n + r;

  const double piv_eps = 1e-11;
  const long max_iter = 200L * (n + m) + 1000;
  for (long iter = 0; iter < max_iter; ++iter) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j)
      if (t(m, j) < -piv_eps) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      double a = t(r, enter);
      if (a > piv_eps) {
        double ratio = t(r, width - 1) / a;
        if (ratio < best - 1e-14 ||
            (ratio <= best + 1e-14 && leave >= 0 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur for a bounded phase-one objective
    t.row(leave) /= t(leave, enter);
    for (int r = 0; r <= m; ++r)
      if (r != leave && t(r, enter) != 0.0) t.row(r) -= t(r, enter) * t.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  double infeas = -t(m, width - 1);
  double scale = 1.0;
  for (double b : sys.rhs) scale = std::max(scale, std::abs(b));
  if (infeas > tol * 10 * scale) return std::nullopt;
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[static_cast<std::size_t>(r)] < n) x[static_cast<std::size_t>(basis[static_cast<std::size_t>(r)])] = std::max(0.0, t(r, width - 1));
  return x;
}

}  // namespace wnet
