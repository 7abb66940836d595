#include "toy.hpp"

#include <random>

#include "rieif/train.hpp"

namespace rieif::testing {

nd::Array random_array(std::uint64_t seed, nd::Shape shape, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  nd::Array a(std::move(shape));
  for (double& v : a.storage()) v = u(rng);
  return a;
}

ToyInstance make_toy(std::uint64_t seed, const model::Ablation& ablation, std::size_t layers) {
  ToyInstance t;
  t.cfg.nodes = 4;
  t.cfg.K = 2;
  t.cfg.D = 8;
  t.cfg.H = 2;
  t.cfg.L = layers;
  t.cfg.d_pe = 3;
  t.cfg.T_seg = 4;
  t.cfg.ablation = ablation;
  t.graph = kg::KnowledgeGraph({"a", "b", "c", "d"}, {{0, 1}, {1, 2}, {2, 3}, {0, 2}});
  t.context = model::make_graph_context(t.graph, t.cfg.d_pe);
  t.x = random_array(seed * 3 + 1, {t.cfg.T_seg * t.cfg.nodes, t.cfg.K}, -1.5, 1.5);
  for (std::size_t step : {1, 2}) {
    const std::size_t r = model::row_index(step, 0, 2, 1, t.cfg.nodes);
    for (std::size_t k = 0; k < t.cfg.K; ++k) t.x[r * t.cfg.K + k] = 0.0;
    t.rows.push_back(r);
  }
  // plus two visible rows so the loss has more than one supervised cell per node
  t.rows.push_back(model::row_index(3, 0, 0, 1, t.cfg.nodes));
  t.rows.push_back(model::row_index(0, 0, 3, 1, t.cfg.nodes));
  const nd::Array gt = random_array(seed * 3 + 2, {t.rows.size(), 1});
  t.truth = gt.storage();
  t.params = model::init_params(t.cfg, seed);
  // move biases off zero so every code path is exercised
  std::mt19937_64 rng(seed * 3 + 3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (auto& [name, a] : t.params)
    if (a.rank() == 1)
      for (double& v : a.storage()) v += u(rng);
  return t;
}

nd::Program toy_program(const ToyInstance& toy, double lambda_scale, double lambda_shape) {
  return [&toy, lambda_scale, lambda_shape](nd::Tape& tape, const nd::VarMap& p) {
    const nd::Var x_hat = model::forward(tape, p, toy.x, toy.batch, toy.context, toy.cfg, &toy.rows);
    const nd::Var gt = tape.constant(nd::Array({toy.truth.size(), 1}, toy.truth));
    return train::hybrid_loss(x_hat, gt, lambda_scale, lambda_shape);
  };
}

}  // namespace rieif::testing
