#pragma once

// Small model instances shared by unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "rieif/kgraph.hpp"
#include "rieif/model.hpp"
#include "rieif/ndgrad.hpp"

namespace rieif::testing {

struct ToyInstance {
  model::ModelConfig cfg;
  kg::KnowledgeGraph graph;
  model::GraphContext context;
  nd::Array x;                    // [T_seg * batch * N, K]
  std::size_t batch = 1;
  std::vector<std::size_t> rows;  // supervised rows
  std::vector<double> truth;
  nd::ParamMap params;
};

/// N=4, K=2, D=8, H=2, L=1, T_seg=4 on the graph 0->1->2->3 plus 0->2. Inputs, truth and
/// parameters are random per seed; node 2 is hidden for the middle two steps.
ToyInstance make_toy(std::uint64_t seed, const model::Ablation& ablation = {}, std::size_t layers = 1);

/// forward(rows) followed by the hybrid loss against the instance's truth.
nd::Program toy_program(const ToyInstance& toy, double lambda_scale = 1.0, double lambda_shape = 1.0);

/// Random [rows, cols] array with entries uniform in [lo, hi).
nd::Array random_array(std::uint64_t seed, nd::Shape shape, double lo = -1.0, double hi = 1.0);

}  // namespace rieif::testing
