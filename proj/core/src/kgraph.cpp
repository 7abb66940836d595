#include "rieif/kgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "rieif/dataio.hpp"
#include "rieif/eigen_sym.hpp"
#include "rieif/error.hpp"
#include "rieif/rng.hpp"

namespace rieif::kg {

namespace {

template <typename E, std::size_t M>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&table)[M], const char* what) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const auto& [name, v] : table) {
    if (lower == name) return v;
  }
  throw ConfigError(std::string("unknown ") + what + " label '" + s + "'");
}

template <typename E, std::size_t M>
std::string enum_name(E v, const std::pair<const char*, E> (&table)[M]) {
  for (const auto& [name, x] : table) {
    if (x == v) return name;
  }
  return "?";
}

constexpr std::pair<const char*, Layer> kLayers[] = {
    {"pdcp", Layer::PDCP}, {"rlc", Layer::RLC}, {"mac", Layer::MAC}, {"phy", Layer::PHY}, {"other", Layer::Other}};
constexpr std::pair<const char*, Category> kCategories[] = {{"coding", Category::Coding},
                                                            {"throughput", Category::Throughput},
                                                            {"quality", Category::Quality},
                                                            {"spatial", Category::Spatial},
                                                            {"power", Category::Power}};
constexpr std::pair<const char*, Signal> kSignals[] = {
    {"throughput", Signal::Throughput}, {"mcs", Signal::MCS},         {"prb", Signal::PRB},
    {"ri", Signal::RI},                 {"pathloss", Signal::Pathloss}, {"txp", Signal::TxPower},
    {"bler", Signal::BLER},             {"acknack", Signal::AckNack}, {"other", Signal::Other}};

}  // namespace

Layer parse_layer(const std::string& s) { return parse_enum(s, kLayers, "layer"); }
Category parse_category(const std::string& s) { return parse_enum(s, kCategories, "category"); }
Signal parse_signal(const std::string& s) { return parse_enum(s, kSignals, "signal"); }
std::string to_string(Layer v) { return enum_name(v, kLayers); }
std::string to_string(Category v) { return enum_name(v, kCategories); }
std::string to_string(Signal v) { return enum_name(v, kSignals); }

KnowledgeGraph::KnowledgeGraph(std::vector<std::string> names, std::vector<Edge> edges, std::vector<NodeRole> roles)
    : names_(std::move(names)), edges_(std::move(edges)), roles_(std::move(roles)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw ConfigError("knowledge graph: duplicate node '" + n + "'");
  }
  if (!roles_.empty() && roles_.size() != names_.size()) {
    throw ConfigError("knowledge graph: role list does not match node list");
  }
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    if (e.src >= size() || e.dst >= size()) throw ConfigError("knowledge graph: edge endpoint out of range");
    if (e.src == e.dst) throw ConfigError("knowledge graph: self-loop on '" + names_[e.src] + "'");
    if (k > 0 && edges_[k - 1] == e) {
      throw ConfigError("knowledge graph: duplicate edge " + names_[e.src] + " -> " + names_[e.dst]);
    }
  }
}

std::size_t KnowledgeGraph::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ConfigError("knowledge graph: unknown node '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool KnowledgeGraph::has_edge(std::size_t src, std::size_t dst) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{src, dst});
}

std::vector<std::size_t> KnowledgeGraph::incoming(std::size_t i, bool self_loop) const {
  if (i >= size()) throw ConfigError("knowledge graph: node index out of range");
  std::vector<std::size_t> out;
  for (const Edge& e : edges_) {
    if (e.dst == i) out.push_back(e.src);
  }
  if (self_loop) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

KnowledgeGraph KnowledgeGraph::reordered(const std::vector<std::string>& order) const {
  if (order.size() != size()) throw ConfigError("knowledge graph: node list has a different size than the panel");
  std::vector<std::size_t> old_to_new(size());
  std::vector<NodeRole> roles;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t old = index_of(order[k]);
    old_to_new[old] = k;
    if (!roles_.empty()) roles.push_back(roles_[old]);
  }
  std::vector<Edge> edges;
  for (const Edge& e : edges_) edges.push_back({old_to_new[e.src], old_to_new[e.dst]});
  return KnowledgeGraph(order, std::move(edges), std::move(roles));
}

KnowledgeGraph build_wireless_kg(const std::vector<NodeRole>& roles) {
  const std::size_t n = roles.size();
  std::set<Edge> edges;
  auto next_layer = [](Layer l) {
    switch (l) {
      case Layer::PDCP: return Layer::RLC;
      case Layer::RLC: return Layer::MAC;
      case Layer::MAC: return Layer::PHY;
      default: return Layer::Other;
    }
  };
  auto same_leg = [&](std::size_t a, std::size_t b) { return roles[a].leg == roles[b].leg; };
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      const NodeRole& a = roles[u];
      const NodeRole& b = roles[v];
      // vertical: stack order between throughput nodes; PDCP feeds every leg
      if (a.signal == Signal::Throughput && b.signal == Signal::Throughput && a.layer != Layer::Other &&
          next_layer(a.layer) == b.layer && (same_leg(u, v) || a.layer == Layer::PDCP)) {
        edges.insert({u, v});
      }
      if (!same_leg(u, v)) continue;
      // horizontal: resource allocation into PHY throughput
      if ((a.signal == Signal::MCS || a.signal == Signal::PRB || a.signal == Signal::RI) &&
          b.signal == Signal::Throughput && b.layer == Layer::PHY) {
        edges.insert({u, v});
      }
      // power control and feedback loops
      if ((a.signal == Signal::Pathloss && b.signal == Signal::TxPower) ||
          (a.signal == Signal::TxPower && b.signal == Signal::BLER) ||
          (a.signal == Signal::BLER && b.signal == Signal::AckNack)) {
        edges.insert({u, v});
      }
    }
  }
  std::vector<std::string> names;
  for (const auto& r : roles) names.push_back(r.name);
  return KnowledgeGraph(std::move(names), {edges.begin(), edges.end()}, roles);
}

std::vector<double> symmetrized_normalized_laplacian(const KnowledgeGraph& kg) {
  const std::size_t n = kg.size();
  std::vector<double> a(n * n, 0.0);
  for (const Edge& e : kg.edges()) {
    a[e.src * n + e.dst] = 1.0;
    a[e.dst * n + e.src] = 1.0;
  }
  std::vector<double> inv_sqrt(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += a[i * n + j];
    if (d > 0.0) inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      l[i * n + j] = (i == j ? 1.0 : 0.0) - inv_sqrt[i] * a[i * n + j] * inv_sqrt[j];
    }
  }
  return l;
}

LapPE laplacian_positional_encoding(const KnowledgeGraph& kg, std::size_t d_pe) {
  if (d_pe < 1) throw ConfigError("laplacian_positional_encoding: d_pe must be >= 1");
  const std::size_t n = kg.size();
  const SymEigen eig = symmetric_eigen(symmetrized_normalized_laplacian(kg), n);
  LapPE pe;
  pe.nodes = n;
  pe.dims = d_pe;
  pe.e.assign(n * d_pe, 0.0);
  pe.eigenvalues.assign(d_pe, 0.0);
  std::size_t col = 0;
  for (std::size_t k = 0; k < n && col < d_pe; ++k) {
    if (eig.values[k] < kTrivialEigenvalue) continue;
    double sign = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double x = eig.vectors[r * n + k];
      if (std::abs(x) > 1e-10) {
        sign = x > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) pe.e[r * d_pe + col] = sign * eig.vectors[r * n + k];
    pe.eigenvalues[col] = eig.values[k];
    ++col;
  }
  pe.trivial = static_cast<std::size_t>(
      std::count_if(eig.values.begin(), eig.values.end(), [](double v) { return v < kTrivialEigenvalue; }));
  return pe;
}

std::vector<std::uint8_t> attention_mask_matrix(const KnowledgeGraph& kg, bool self_loops) {
  const std::size_t n = kg.size();
  std::vector<std::uint8_t> m(n * n, 0);
  for (const Edge& e : kg.edges()) m[e.dst * n + e.src] = 1;
  if (self_loops) {
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1;
  }
  return m;
}

KnowledgeGraph random_graph_like(const KnowledgeGraph& kg, std::uint64_t seed) {
  const std::size_t n = kg.size();
  std::vector<Edge> all;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v) all.push_back({u, v});
  Rng rng = make_rng(seed, "graph");
  // partial Fisher-Yates; std::shuffle's algorithm is implementation-defined
  const std::size_t m = std::min(kg.edges().size(), all.size());
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng() % (all.size() - k));
    std::swap(all[k], all[j]);
  }
  all.resize(m);
  return KnowledgeGraph(kg.names(), std::move(all), kg.roles());
}

std::size_t connected_components(const KnowledgeGraph& kg) {
  const std::size_t n = kg.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t comps = n;
  for (const Edge& e : kg.edges()) {
    const std::size_t a = find(e.src), b = find(e.dst);
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  }
  return comps;
}

KnowledgeGraph parse_kg_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("knowledge graph JSON: ") + e.what(), 0, e.byte);
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw ConfigError("knowledge graph JSON: missing 'nodes' array");
  }
  std::vector<NodeRole> roles;
  bool have_roles = true;
  try {
    for (const auto& node : doc["nodes"]) {
      NodeRole r;
      if (node.is_string()) {
        r.name = node.get<std::string>();
        have_roles = false;
      } else {
        r.name = node.at("name").get<std::string>();
        if (node.contains("layer")) r.layer = parse_layer(node["layer"].get<std::string>());
        if (node.contains("category")) r.category = parse_category(node["category"].get<std::string>());
        if (node.contains("signal")) r.signal = parse_signal(node["signal"].get<std::string>());
        if (node.contains("leg")) r.leg = node["leg"].get<int>();
      }
      roles.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("knowledge graph JSON: bad node entry: ") + e.what());
  }
  std::vector<std::string> names;
  for (const auto& r : roles) names.push_back(r.name);
  if (!doc.contains("edges")) {
    if (!have_roles) throw ConfigError("knowledge graph JSON: no edges and no role labels to derive them from");
    return build_wireless_kg(roles);
  }
  std::vector<Edge> edges;
  KnowledgeGraph index(names, {});
  try {
    for (const auto& e : doc["edges"]) {
      edges.push_back({index.index_of(e.at(0).get<std::string>()), index.index_of(e.at(1).get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("knowledge graph JSON: bad edge entry: ") + e.what());
  }
  return KnowledgeGraph(std::move(names), std::move(edges), have_roles ? roles : std::vector<NodeRole>{});
}

std::string kg_to_json(const KnowledgeGraph& kg) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["nodes"] = ordered_json::array();
  for (std::size_t i = 0; i < kg.size(); ++i) {
    ordered_json node;
    node["name"] = kg.names()[i];
    if (!kg.roles().empty()) {
      const NodeRole& r = kg.roles()[i];
      node["layer"] = to_string(r.layer);
      node["category"] = to_string(r.category);
      node["signal"] = to_string(r.signal);
      node["leg"] = r.leg;
    }
    doc["nodes"].push_back(node);
  }
  doc["edges"] = ordered_json::array();
  for (const Edge& e : kg.edges()) doc["edges"].push_back({kg.names()[e.src], kg.names()[e.dst]});
  return doc.dump(2) + "\n";
}

KnowledgeGraph load_kg_json(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("knowledge graph file '" + path.string() + "' does not exist");
  return parse_kg_json(data::read_text_file(path));
}

void save_kg_json(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  data::write_text_file(path, kg_to_json(kg));
}

}  // namespace rieif::kg
