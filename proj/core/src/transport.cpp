// Exact discrete optimal transport for the small supports met in curvature estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "rieif/error.hpp"
#include "rieif/geodiag.hpp"

namespace rieif::geo {

namespace {

struct Arc {
  std::size_t to;
  std::size_t rev;
  double cap;
  double cost;
};

class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t n) : g_(n) {}

  void add(std::size_t u, std::size_t v, double cap, double cost) {
    g_[u].push_back({v, g_[v].size(), cap, cost});
    g_[v].push_back({u, g_[u].size() - 1, 0.0, -cost});
  }

  // Successive shortest paths; all initial costs are non-negative, so Dijkstra on reduced
  // costs with Johnson potentials stays exact after reverse arcs appear.
  double min_cost(std::size_t s, std::size_t t, double want, double tol) {
    const std::size_t n = g_.size();
    const double inf = std::numeric_limits<double>::infinity();
    double flow = 0.0, cost = 0.0;
    std::vector<double> dist(n), pot(n, 0.0);
    std::vector<std::size_t> prev_node(n), prev_arc(n);
    using Item = std::pair<double, std::size_t>;
    while (flow < want - tol) {
      std::fill(dist.begin(), dist.end(), inf);
      dist[s] = 0.0;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
      pq.emplace(0.0, s);
      while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (std::size_t k = 0; k < g_[u].size(); ++k) {
          const Arc& a = g_[u][k];
          if (a.cap <= tol) continue;
          // clamp round-off so reduced costs never go negative
          const double nd = d + std::max(0.0, a.cost + pot[u] - pot[a.to]);
          if (nd < dist[a.to]) {
            dist[a.to] = nd;
            prev_node[a.to] = u;
            prev_arc[a.to] = k;
            pq.emplace(nd, a.to);
          }
        }
      }
      if (dist[t] == inf) break;
      for (std::size_t v = 0; v < n; ++v)
        if (dist[v] < inf) pot[v] += dist[v];
      double push = want - flow;
      double path_cost = 0.0;
      for (std::size_t v = t; v != s; v = prev_node[v]) {
        const Arc& a = g_[prev_node[v]][prev_arc[v]];
        push = std::min(push, a.cap);
        path_cost += a.cost;
      }
      for (std::size_t v = t; v != s; v = prev_node[v]) {
        Arc& a = g_[prev_node[v]][prev_arc[v]];
        a.cap -= push;
        g_[v][a.rev].cap += push;
      }
      flow += push;
      cost += push * path_cost;
    }
    if (flow < want - tol) throw ConfigError("wasserstein1: supply and demand cannot be matched");
    return cost;
  }

 private:
  std::vector<std::vector<Arc>> g_;
};

}  // namespace

double wasserstein1(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost) {
  const std::size_t m = supply.size(), k = demand.size();
  if (cost.size() != m * k) throw ShapeError("wasserstein1: cost matrix is not |supply| x |demand|");
  double ts = 0.0, td = 0.0;
  for (double v : supply) ts += v;
  for (double v : demand) td += v;
  if (m == 0 || k == 0 || std::abs(ts - td) > 1e-9 * std::max(1.0, ts)) {
    throw ConfigError("wasserstein1: measures must be non-empty with equal mass");
  }
  const std::size_t s = m + k, t = m + k + 1;
  FlowNetwork net(m + k + 2);
  for (std::size_t i = 0; i < m; ++i) net.add(s, i, supply[i], 0.0);
  for (std::size_t j = 0; j < k; ++j) net.add(m + j, t, demand[j], 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) net.add(i, m + j, std::numeric_limits<double>::infinity(), cost[i * k + j]);
  return net.min_cost(s, t, std::min(ts, td), 1e-12 * std::max(1.0, ts));
}

}  // namespace rieif::geo
