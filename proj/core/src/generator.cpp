#include "rieif/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <json.hpp>

#include "rieif/error.hpp"
#include "rieif/rng.hpp"

namespace rieif::data {

namespace {

constexpr std::size_t kBurnIn = 256;

std::string node_name(std::size_t i) {
  std::string s = std::to_string(i);
  return "x" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (nodes < 4) throw ConfigError("generator: N must be >= 4");
  if (steps < 256) throw ConfigError("generator: T must be >= 256");
  if (!(noise_std >= 0.0)) throw ConfigError("generator: noise_std must be >= 0");
  if (!(coupling_density >= 0.0 && coupling_density <= 1.0)) {
    throw ConfigError("generator: coupling_density must lie in [0, 1]");
  }
  if (chain_length < 1) throw ConfigError("generator: chain_length must be >= 1");
  if (!(ar_min <= ar_max) || std::abs(ar_min) >= 1.0 || std::abs(ar_max) >= 1.0 || std::abs(root_ar) >= 1.0 ||
      std::abs(trend_ar) >= 1.0) {
    throw ConfigError("generator: AR coefficients must lie in (-1, 1) with ar_min <= ar_max");
  }
  if (!(weight_min <= weight_max) || weight_min < 0.0) throw ConfigError("generator: need 0 <= weight_min <= weight_max");
  if (!(sine_period_min > 0.0 && sine_period_min <= sine_period_max)) {
    throw ConfigError("generator: need 0 < sine_period_min <= sine_period_max");
  }
  if (max_delay < 1) throw ConfigError("generator: max_delay must be >= 1");
  if (!(gain_std >= 0.0) || std::abs(gain_ar) >= 1.0) throw ConfigError("generator: need gain_std >= 0 and |gain_ar| < 1");
  for (const auto& e : edges) {
    if (e.src >= nodes || e.dst >= nodes || e.src == e.dst) throw ConfigError("generator: invalid explicit edge");
  }
  for (const auto& [i, a] : ar_override) {
    if (i >= nodes || std::abs(a) >= 1.0) throw ConfigError("generator: invalid AR override");
  }
  for (const auto& [i, s] : noise_override) {
    if (i >= nodes || s < 0.0) throw ConfigError("generator: invalid noise override");
  }
}

GeneratorSpec parse_generator_spec(const std::string& json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("generator spec: ") + e.what(), 0, e.byte);
  }
  GeneratorSpec s;
  try {
    auto get = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
    };
    get("N", s.nodes);
    get("T", s.steps);
    get("seed", s.seed);
    get("noise_std", s.noise_std);
    get("coupling_density", s.coupling_density);
    get("trend_amplitude", s.trend_amplitude);
    get("chain_length", s.chain_length);
    get("ar_min", s.ar_min);
    get("ar_max", s.ar_max);
    get("root_ar", s.root_ar);
    get("weight_min", s.weight_min);
    get("weight_max", s.weight_max);
    get("saturating_fraction", s.saturating_fraction);
    get("sine_amplitude", s.sine_amplitude);
    get("sine_period_min", s.sine_period_min);
    get("sine_period_max", s.sine_period_max);
    get("trend_ar", s.trend_ar);
    get("gain_std", s.gain_std);
    get("gain_ar", s.gain_ar);
    get("max_delay", s.max_delay);
    if (doc.contains("edges")) {
      for (const auto& e : doc["edges"]) {
        CouplingEdge c;
        c.src = e.at("src").get<std::size_t>();
        c.dst = e.at("dst").get<std::size_t>();
        c.weight = e.value("weight", 1.0);
        c.delay = e.value("delay", std::size_t{1});
        c.saturating = e.value("saturating", false);
        s.edges.push_back(c);
      }
    }
    if (doc.contains("ar_override")) {
      for (const auto& [k, v] : doc["ar_override"].items()) s.ar_override[std::stoul(k)] = v.get<double>();
    }
    if (doc.contains("noise_override")) {
      for (const auto& [k, v] : doc["noise_override"].items()) s.noise_override[std::stoul(k)] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("generator spec: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("generator spec: bad node index: ") + e.what());
  }
  s.validate();
  return s;
}

std::string generator_spec_to_json(const GeneratorSpec& s) {
  nlohmann::ordered_json doc;
  doc["N"] = s.nodes;
  doc["T"] = s.steps;
  doc["seed"] = s.seed;
  doc["noise_std"] = s.noise_std;
  doc["coupling_density"] = s.coupling_density;
  doc["trend_amplitude"] = s.trend_amplitude;
  doc["chain_length"] = s.chain_length;
  doc["ar_min"] = s.ar_min;
  doc["ar_max"] = s.ar_max;
  doc["root_ar"] = s.root_ar;
  doc["weight_min"] = s.weight_min;
  doc["weight_max"] = s.weight_max;
  doc["saturating_fraction"] = s.saturating_fraction;
  doc["sine_amplitude"] = s.sine_amplitude;
  doc["sine_period_min"] = s.sine_period_min;
  doc["sine_period_max"] = s.sine_period_max;
  doc["trend_ar"] = s.trend_ar;
  doc["gain_std"] = s.gain_std;
  doc["gain_ar"] = s.gain_ar;
  doc["max_delay"] = s.max_delay;
  if (!s.edges.empty()) {
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : s.edges) {
      doc["edges"].push_back(
          {{"src", e.src}, {"dst", e.dst}, {"weight", e.weight}, {"delay", e.delay}, {"saturating", e.saturating}});
    }
  }
  if (!s.ar_override.empty()) {
    for (const auto& [k, v] : s.ar_override) doc["ar_override"][std::to_string(k)] = v;
  }
  if (!s.noise_override.empty()) {
    for (const auto& [k, v] : s.noise_override) doc["noise_override"][std::to_string(k)] = v;
  }
  return doc.dump(2) + "\n";
}

SyntheticData generate_synthetic_panel(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t n = spec.nodes;
  const std::size_t total = spec.steps + kBurnIn;
  Rng rng = make_rng(seed, "data");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unif(rng); };

  std::vector<CouplingEdge> couplings = spec.edges;
  if (couplings.empty()) {
    auto chain_of = [&](std::size_t i) { return i / spec.chain_length; };
    auto draw_edge = [&](std::size_t u, std::size_t v) {
      CouplingEdge e;
      e.src = u;
      e.dst = v;
      e.weight = uniform(spec.weight_min, spec.weight_max) * (unif(rng) < 0.5 ? -1.0 : 1.0);
      e.delay = 1 + static_cast<std::size_t>(rng() % spec.max_delay);
      e.saturating = unif(rng) < spec.saturating_fraction;
      return e;
    };
    for (std::size_t v = 1; v < n; ++v) {
      if (chain_of(v) == chain_of(v - 1)) couplings.push_back(draw_edge(v - 1, v));
    }
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (chain_of(u) != chain_of(v) && unif(rng) < spec.coupling_density) couplings.push_back(draw_edge(u, v));
      }
    }
  }
  std::sort(couplings.begin(), couplings.end(),
            [](const CouplingEdge& a, const CouplingEdge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });

  // topological order (Kahn, smallest index first)
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : couplings) ++indeg[e.dst];
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.insert(i);
  std::vector<std::size_t> order;
  std::vector<std::size_t> remaining = indeg;
  while (!ready.empty()) {
    const std::size_t u = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(u);
    for (const auto& e : couplings) {
      if (e.src == u && --remaining[e.dst] == 0) ready.insert(e.dst);
    }
  }
  if (order.size() != n) throw ConfigError("generator: coupling graph has a cycle");

  // per-node dynamics, drawn in index order so they do not depend on the topology
  std::vector<double> ar(n), noise(n), amp(n), period(n), phase(n), offset(n), unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool root = indeg[i] == 0;
    ar[i] = root ? spec.root_ar : uniform(spec.ar_min, spec.ar_max);
    noise[i] = spec.noise_std;
    amp[i] = root ? spec.sine_amplitude : 0.0;
    period[i] = uniform(spec.sine_period_min, spec.sine_period_max);
    phase[i] = uniform(0.0, 2.0 * std::numbers::pi);
    offset[i] = uniform(-5.0, 5.0);
    unit[i] = uniform(0.5, 5.0);
  }
  for (const auto& [i, a] : spec.ar_override) ar[i] = a;
  for (const auto& [i, s] : spec.noise_override) noise[i] = s;

  std::vector<std::vector<double>> eps(n, std::vector<double>(total));
  for (std::size_t i = 0; i < n; ++i)
    for (double& v : eps[i]) v = gauss(rng);
  std::vector<double> trend(total, 0.0);
  for (std::size_t t = 1; t < total; ++t) trend[t] = spec.trend_ar * trend[t - 1] + gauss(rng);

  std::vector<std::vector<double>> x(n, std::vector<double>(total, 0.0));
  std::vector<std::vector<double>> unit_x(n);  // standardized series fed to children
  auto standardize = [&](const std::vector<double>& s) {
    double mu = 0.0;
    for (std::size_t t = kBurnIn; t < total; ++t) mu += s[t];
    mu /= static_cast<double>(spec.steps);
    double var = 0.0;
    for (std::size_t t = kBurnIn; t < total; ++t) var += (s[t] - mu) * (s[t] - mu);
    const double sd = std::sqrt(var / static_cast<double>(spec.steps));
    std::vector<double> z(s.size());
    for (std::size_t t = 0; t < s.size(); ++t) z[t] = sd > 1e-12 ? (s[t] - mu) / sd : 0.0;
    return z;
  };

  for (std::size_t i : order) {
    std::vector<const CouplingEdge*> parents;
    for (const auto& e : couplings)
      if (e.dst == i) parents.push_back(&e);
    double ar_state = 0.0;
    for (std::size_t t = 0; t < total; ++t) {
      const double prev = t > 0 ? x[i][t - 1] : 0.0;
      double v = 0.0;
      if (parents.empty()) {
        ar_state = (t > 0 ? ar[i] * ar_state : 0.0) + noise[i] * eps[i][t];
        v = amp[i] * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period[i] + phase[i]) + ar_state;
      } else {
        for (const CouplingEdge* e : parents) {
          if (t < e->delay) continue;
          const double z = unit_x[e->src][t - e->delay];
          v += e->weight * (e->saturating ? std::tanh(z) : z);
        }
        v += ar[i] * prev + noise[i] * eps[i][t];
      }
      x[i][t] = v;
    }
    unit_x[i] = standardize(x[i]);
  }
  const std::vector<double> unit_trend = standardize(trend);

  // drawn last so that gain_std = 0 leaves every other draw unchanged
  const std::size_t chains = (n + spec.chain_length - 1) / spec.chain_length;
  std::vector<std::vector<double>> gain(chains, std::vector<double>(total, 1.0));
  if (spec.gain_std > 0.0) {
    for (auto& g : gain) {
      std::vector<double> s(total, 0.0);
      for (std::size_t t = 1; t < total; ++t) s[t] = spec.gain_ar * s[t - 1] + gauss(rng);
      const std::vector<double> z = standardize(s);
      for (std::size_t t = 0; t < total; ++t) g[t] = std::exp(spec.gain_std * z[t]);
    }
  }

  SyntheticData out;
  out.couplings = couplings;
  out.ar = ar;
  out.panel.steps = spec.steps;
  out.panel.values.resize(n * spec.steps);
  out.panel.raw_missing = MissingMask(n, spec.steps);
  for (std::size_t i = 0; i < n; ++i) {
    out.panel.node_names.push_back(node_name(i));
    for (std::size_t t = 0; t < spec.steps; ++t) {
      const std::size_t s = t + kBurnIn;
      // constant-variance processes keep their exact dynamics when there is no trend
      const double core = spec.trend_amplitude == 0.0 ? x[i][s] : unit_x[i][s] + spec.trend_amplitude * unit_trend[s];
      out.panel.values[i * spec.steps + t] = offset[i] + unit[i] * gain[i / spec.chain_length][s] * core;
    }
  }
  std::vector<kg::Edge> edges;
  for (const auto& e : couplings) edges.push_back({e.src, e.dst});
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  out.graph = kg::KnowledgeGraph(out.panel.node_names, std::move(edges));
  return out;
}

}  // namespace rieif::data
