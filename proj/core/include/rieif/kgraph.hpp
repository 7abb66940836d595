#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rieif::kg {

enum class Layer { PDCP, RLC, MAC, PHY, Other };
enum class Category { Coding, Throughput, Quality, Spatial, Power };
/// The measured quantity, which is what the horizontal rules key on.
enum class Signal { Throughput, MCS, PRB, RI, Pathloss, TxPower, BLER, AckNack, Other };

struct NodeRole {
  std::string name;
  Layer layer = Layer::Other;
  Category category = Category::Throughput;
  Signal signal = Signal::Other;
  int leg = 0;  // dual-connectivity leg; 0 = primary
};

Layer parse_layer(const std::string& s);
Category parse_category(const std::string& s);
Signal parse_signal(const std::string& s);
std::string to_string(Layer v);
std::string to_string(Category v);
std::string to_string(Signal v);

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Directed dependency graph. Edges are kept sorted by (src, dst); self-loops and
/// duplicates are rejected at construction.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(std::vector<std::string> names, std::vector<Edge> edges, std::vector<NodeRole> roles = {});

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<NodeRole>& roles() const noexcept { return roles_; }
  std::size_t index_of(const std::string& name) const;
  bool has_edge(std::size_t src, std::size_t dst) const;

  /// Sources of edges into i, ascending, with i itself merged in when `self_loop`.
  std::vector<std::size_t> incoming(std::size_t i, bool self_loop = true) const;

  /// Same graph relabelled to `order` (a permutation of this graph's names).
  KnowledgeGraph reordered(const std::vector<std::string>& order) const;

 private:
  std::vector<std::string> names_;
  std::vector<Edge> edges_;
  std::vector<NodeRole> roles_;
};

/// Applies the protocol rules to role labels: stack-order chains between throughput
/// nodes and the intra-layer control loops.
KnowledgeGraph build_wireless_kg(const std::vector<NodeRole>& roles);

/// Row-major N x N, L = I - D^-1/2 max(A, A^T) D^-1/2 with D^-1/2 = 0 at degree 0.
std::vector<double> symmetrized_normalized_laplacian(const KnowledgeGraph& kg);

struct LapPE {
  std::size_t nodes = 0;
  std::size_t dims = 0;
  std::vector<double> e;  // nodes x dims, row-major
  std::vector<double> eigenvalues;  // one per column, 0 for padded columns
  std::size_t trivial = 0;  // skipped zero eigenvalues
  double at(std::size_t i, std::size_t k) const { return e[i * dims + k]; }
};

/// Eigenvalues below this count as the trivial eigenspace.
inline constexpr double kTrivialEigenvalue = 1e-8;

LapPE laplacian_positional_encoding(const KnowledgeGraph& kg, std::size_t d_pe);

/// mask[i*N + j] = 1 iff j may be attended from i (j -> i edge, or j == i).
std::vector<std::uint8_t> attention_mask_matrix(const KnowledgeGraph& kg, bool self_loops = true);

/// Uniform random directed graph with the same node set and edge count.
KnowledgeGraph random_graph_like(const KnowledgeGraph& kg, std::uint64_t seed);

std::size_t connected_components(const KnowledgeGraph& kg);

/// {"nodes":[{"name","layer","category","signal","leg"}...], "edges":[["a","b"],...]}.
/// With "edges" present they are used verbatim; otherwise the protocol rules apply.
KnowledgeGraph parse_kg_json(const std::string& text);
std::string kg_to_json(const KnowledgeGraph& kg);
KnowledgeGraph load_kg_json(const std::filesystem::path& path);
void save_kg_json(const KnowledgeGraph& kg, const std::filesystem::path& path);

}  // namespace rieif::kg
