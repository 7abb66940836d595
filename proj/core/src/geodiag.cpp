#include "rieif/geodiag.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>

#include "rieif/error.hpp"
#include "rieif/rng.hpp"

namespace rieif::geo {

double euclidean(const PointCloud& pc, std::size_t a, std::size_t b) {
  double s = 0.0;
  const double* pa = pc.x.data() + a * pc.dims;
  const double* pb = pc.x.data() + b * pc.dims;
  for (std::size_t d = 0; d < pc.dims; ++d) s += (pa[d] - pb[d]) * (pa[d] - pb[d]);
  return std::sqrt(s);
}

double NeighborGraph::weight(std::size_t a, std::size_t b) const {
  for (const auto& [v, w] : adj[a])
    if (v == b) return w;
  return kUnreachable;
}

NeighborGraph knn_graph(const PointCloud& pc, std::size_t k_nn) {
  const std::size_t n = pc.count;
  if (k_nn < 1 || n < k_nn + 1) {
    throw ConfigError("knn_graph: need at least k_nn + 1 = " + std::to_string(k_nn + 1) + " points, have " +
                      std::to_string(n));
  }
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t a = 0; a < n; ++a) {
    cand.clear();
    for (std::size_t b = 0; b < n; ++b)
      if (b != a) cand.emplace_back(euclidean(pc, a, b), b);
    // ties resolved by index for reproducibility
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k_nn), cand.end());
    for (std::size_t k = 0; k < k_nn; ++k) pairs.insert(std::minmax(a, cand[k].second));
  }
  NeighborGraph g;
  g.k_nn = k_nn;
  g.adj.resize(n);
  for (const auto& [a, b] : pairs) {
    const double w = euclidean(pc, a, b);
    g.edges.push_back({a, b, w});
    g.adj[a].emplace_back(b, w);
    g.adj[b].emplace_back(a, w);
  }
  for (auto& row : g.adj) std::sort(row.begin(), row.end());
  return g;
}

std::pair<PointCloud, NeighborGraph> build_knn_graph(std::span<const double> panel_y, std::size_t nodes,
                                                     std::size_t steps, std::size_t max_samples, std::size_t k_nn,
                                                     std::uint64_t seed) {
  if (panel_y.size() != nodes * steps) throw ShapeError("build_knn_graph: panel size is not N x T");
  const std::size_t ts = std::min(steps, max_samples);
  if (ts < k_nn + 1) {
    throw ConfigError("build_knn_graph: sample of " + std::to_string(ts) + " is smaller than k_nn + 1");
  }
  std::vector<std::size_t> idx(steps);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed, "knn-sample");
  for (std::size_t k = 0; k < ts; ++k) std::swap(idx[k], idx[k + static_cast<std::size_t>(rng() % (steps - k))]);
  idx.resize(ts);
  std::sort(idx.begin(), idx.end());
  PointCloud pc;
  pc.count = ts;
  pc.dims = nodes;
  pc.x.resize(ts * nodes);
  for (std::size_t a = 0; a < ts; ++a)
    for (std::size_t i = 0; i < nodes; ++i) pc.x[a * nodes + i] = panel_y[i * steps + idx[a]];
  NeighborGraph g = knn_graph(pc, k_nn);
  g.sample = std::move(idx);
  return {std::move(pc), std::move(g)};
}

std::vector<double> dijkstra(const NeighborGraph& g, std::size_t source) {
  std::vector<double> dist(g.size(), kUnreachable);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.emplace(0.0, source);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : g.adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.emplace(dist[v], v);
      }
    }
  }
  return dist;
}

std::vector<PairDistance> graph_geodesics(const PointCloud& pc, const NeighborGraph& g,
                                          const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::map<std::size_t, std::vector<std::size_t>> by_source;
  for (std::size_t k = 0; k < pairs.size(); ++k) by_source[pairs[k].first].push_back(k);
  std::vector<PairDistance> out(pairs.size());
  for (const auto& [src, ks] : by_source) {
    const std::vector<double> d = dijkstra(g, src);
    for (std::size_t k : ks) {
      const auto [a, b] = pairs[k];
      out[k] = {a, b, d[b], euclidean(pc, a, b), d[b] != kUnreachable};
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t vertices, std::size_t count,
                                                              std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t total = vertices * (vertices - (vertices > 0 ? 1 : 0)) / 2;
  if (total <= count) {
    for (std::size_t a = 0; a < vertices; ++a)
      for (std::size_t b = a + 1; b < vertices; ++b) out.emplace_back(a, b);
    return out;
  }
  Rng rng = make_rng(seed, "pairs");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  while (out.size() < count) {
    const std::size_t a = static_cast<std::size_t>(rng() % vertices);
    const std::size_t b = static_cast<std::size_t>(rng() % vertices);
    if (a == b) continue;
    const auto p = std::minmax(a, b);
    if (seen.insert(p).second) out.emplace_back(p);
  }
  return out;
}

Distortion distortion_report(const std::vector<PairDistance>& pairs) {
  Distortion r;
  double ratio_sum = 0.0;
  std::size_t ratio_n = 0, violations = 0, bounded = 0;
  for (const auto& p : pairs) {
    if (!p.connected) {
      ++r.disconnected;
      continue;
    }
    ++r.connected;
    if (p.d_geo > p.d_euc + 1e-12) ++violations;
    if (p.d_geo >= p.d_euc - 1e-9) ++bounded;
    if (p.d_euc > 0.0) {
      ratio_sum += p.d_geo / p.d_euc;
      ++ratio_n;
    }
  }
  if (r.connected == 0) throw ConfigError("distortion_report: no connected pair");
  r.mean_ratio = ratio_n ? ratio_sum / static_cast<double>(ratio_n) : 1.0;
  r.violation_rate = static_cast<double>(violations) / static_cast<double>(r.connected);
  r.lower_bound_rate = static_cast<double>(bounded) / static_cast<double>(r.connected);
  return r;
}

namespace {

using DistanceRow = std::function<const std::vector<double>&(std::size_t)>;

double curvature_with(const NeighborGraph& g, std::size_t x, std::size_t y, const DistanceRow& row) {
  if (x >= g.size() || y >= g.size() || x == y || g.weight(x, y) == kUnreachable) {
    throw ConfigError("ollivier_ricci_curvature: vertices are not adjacent");
  }
  const auto& nx = g.adj[x];
  const auto& ny = g.adj[y];
  // integer masses: deg(y) per source and deg(x) per sink keep the flow exact
  std::vector<double> supply(nx.size(), static_cast<double>(ny.size()));
  std::vector<double> demand(ny.size(), static_cast<double>(nx.size()));
  std::vector<double> cost(nx.size() * ny.size());
  for (std::size_t i = 0; i < nx.size(); ++i) {
    const std::vector<double>& d = row(nx[i].first);
    for (std::size_t j = 0; j < ny.size(); ++j) cost[i * ny.size() + j] = d[ny[j].first];
  }
  const double w1 = wasserstein1(supply, demand, cost) / static_cast<double>(nx.size() * ny.size());
  return 1.0 - w1 / row(x)[y];
}

}  // namespace

double ollivier_ricci_curvature(const NeighborGraph& g, std::size_t x, std::size_t y) {
  std::map<std::size_t, std::vector<double>> cache;
  return curvature_with(g, x, y, [&](std::size_t v) -> const std::vector<double>& {
    auto it = cache.find(v);
    if (it == cache.end()) it = cache.emplace(v, dijkstra(g, v)).first;
    return it->second;
  });
}

CurvatureSummary curvature_summary(const NeighborGraph& g, std::size_t max_edges, std::size_t bins,
                                   std::uint64_t seed) {
  if (bins < 1) throw ConfigError("curvature_summary: need at least one bin");
  std::vector<std::size_t> pick(g.edges.size());
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  if (pick.size() > max_edges) {
    Rng rng = make_rng(seed, "orc-edges");
    for (std::size_t k = 0; k < max_edges; ++k)
      std::swap(pick[k], pick[k + static_cast<std::size_t>(rng() % (pick.size() - k))]);
    pick.resize(max_edges);
    std::sort(pick.begin(), pick.end());
  }
  std::map<std::size_t, std::vector<double>> cache;
  auto row = [&](std::size_t v) -> const std::vector<double>& {
    auto it = cache.find(v);
    if (it == cache.end()) {
      if (cache.size() > 4096) cache.clear();
      it = cache.emplace(v, dijkstra(g, v)).first;
    }
    return it->second;
  };
  CurvatureSummary s;
  for (std::size_t k : pick) s.kappa.push_back(curvature_with(g, g.edges[k].a, g.edges[k].b, row));
  if (s.kappa.empty()) return s;
  for (double v : s.kappa) s.mean += v;
  s.mean /= static_cast<double>(s.kappa.size());
  for (double v : s.kappa) s.variance += (v - s.mean) * (v - s.mean);
  s.variance /= static_cast<double>(s.kappa.size());
  const auto [lo_it, hi_it] = std::minmax_element(s.kappa.begin(), s.kappa.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) hi = lo + 1e-9;
  s.counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) s.bin_edges.push_back(lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
  for (double v : s.kappa) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    ++s.counts[std::min(b, bins - 1)];
  }
  return s;
}

}  // namespace rieif::geo
