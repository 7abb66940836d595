#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rieif::geo {

/// Points stored row-major, one snapshot per row.
struct PointCloud {
  std::size_t count = 0;
  std::size_t dims = 0;
  std::vector<double> x;
  std::span<const double> row(std::size_t a) const { return {x.data() + a * dims, dims}; }
};

double euclidean(const PointCloud& pc, std::size_t a, std::size_t b);

struct WeightedEdge {
  std::size_t a = 0;
  std::size_t b = 0;  // a < b
  double w = 0.0;
};

/// Symmetrised (union) kNN graph over a point cloud.
struct NeighborGraph {
  std::vector<std::size_t> sample;  // time index of each vertex
  std::size_t k_nn = 0;
  std::vector<WeightedEdge> edges;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;

  std::size_t size() const { return adj.size(); }
  double weight(std::size_t a, std::size_t b) const;  // +inf if not adjacent
};

NeighborGraph knn_graph(const PointCloud& pc, std::size_t k_nn);

/// Snapshots x_t (N-vectors) of a node-major N x T panel at a uniform sample of
/// min(T, max_samples) time indices (sorted), then the kNN graph over them.
std::pair<PointCloud, NeighborGraph> build_knn_graph(std::span<const double> panel_y, std::size_t nodes,
                                                     std::size_t steps, std::size_t max_samples, std::size_t k_nn,
                                                     std::uint64_t seed);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Dijkstra from one source; unreachable vertices get +inf.
std::vector<double> dijkstra(const NeighborGraph& g, std::size_t source);

struct PairDistance {
  std::size_t a = 0;
  std::size_t b = 0;
  double d_geo = 0.0;
  double d_euc = 0.0;
  bool connected = true;
};

/// Geodesic and straight-line distance for each requested pair.
std::vector<PairDistance> graph_geodesics(const PointCloud& pc, const NeighborGraph& g,
                                          const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// `count` distinct unordered pairs (all pairs if fewer exist), seed-controlled.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t vertices, std::size_t count,
                                                              std::uint64_t seed);

struct Distortion {
  double mean_ratio = 0.0;
  double violation_rate = 0.0;  // fraction with d_geo > d_euc + 1e-12
  double lower_bound_rate = 0.0;  // fraction with d_geo >= d_euc - 1e-9
  std::size_t connected = 0;
  std::size_t disconnected = 0;
};

Distortion distortion_report(const std::vector<PairDistance>& pairs);

/// Exact W1 between two discrete measures under a cost matrix (rows: supply, cols: demand),
/// by successive shortest paths on the transport network.
double wasserstein1(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost);

/// kappa(x, y) = 1 - W1(m_x, m_y) / d(x, y) with m_v uniform on the neighbours of v and
/// shortest-path ground distance.
double ollivier_ricci_curvature(const NeighborGraph& g, std::size_t x, std::size_t y);

struct CurvatureSummary {
  std::vector<double> kappa;  // one per evaluated edge
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
};

/// Curvature on up to `max_edges` edges (all if fewer), histogrammed into `bins` bins.
CurvatureSummary curvature_summary(const NeighborGraph& g, std::size_t max_edges, std::size_t bins,
                                   std::uint64_t seed);

}  // namespace rieif::geo
