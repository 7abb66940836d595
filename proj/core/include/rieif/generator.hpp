#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rieif/dataio.hpp"
#include "rieif/kgraph.hpp"

namespace rieif::data {

struct CouplingEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 1.0;
  std::size_t delay = 1;  // 0 is accepted for explicit edges
  bool saturating = false;
};

/// Parameters of the synthetic graph-coupled generator.
///
/// Nodes are laid out in vertical chains of `chain_length`; horizontal edges join
/// earlier to later nodes of different chains with probability `coupling_density`,
/// so the coupling graph is acyclic in index order. Parents enter through their
/// unit-variance version, optionally squashed by tanh.
struct GeneratorSpec {
  std::size_t nodes = 34;
  std::size_t steps = 4096;
  std::uint64_t seed = 7;
  double noise_std = 0.3;
  double coupling_density = 0.08;
  double trend_amplitude = 0.5;

  std::size_t chain_length = 4;
  double ar_min = 0.2;
  double ar_max = 0.6;
  double root_ar = 0.9;
  double weight_min = 0.6;
  double weight_max = 1.0;
  double saturating_fraction = 0.3;
  double sine_amplitude = 1.0;
  double sine_period_min = 16.0;
  double sine_period_max = 64.0;
  double trend_ar = 0.998;
  /// Slow log-gain per chain (fading-like amplitude drift); 0 disables it.
  double gain_std = 0.0;
  double gain_ar = 0.995;
  std::size_t max_delay = 2;

  /// When non-empty these replace the sampled topology entirely.
  std::vector<CouplingEdge> edges;
  std::map<std::size_t, double> ar_override;
  std::map<std::size_t, double> noise_override;

  void validate() const;
};

GeneratorSpec parse_generator_spec(const std::string& json_text);
std::string generator_spec_to_json(const GeneratorSpec& spec);

struct SyntheticData {
  RawPanel panel;
  kg::KnowledgeGraph graph;  // exact coupling topology
  std::vector<CouplingEdge> couplings;
  std::vector<double> ar;  // lag-1 coefficient actually used per node
};

/// Deterministic in (spec, seed); `seed` overrides spec.seed.
SyntheticData generate_synthetic_panel(const GeneratorSpec& spec, std::uint64_t seed);
inline SyntheticData generate_synthetic_panel(const GeneratorSpec& spec) {
  return generate_synthetic_panel(spec, spec.seed);
}

}  // namespace rieif::data
