#include <random>

#include <benchmark/benchmark.h>

#include "rieif/generator.hpp"
#include "rieif/model.hpp"
#include "rieif/train.hpp"

namespace {

using namespace rieif;

nd::Array uniform(std::uint64_t seed, nd::Shape shape) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nd::Array a(std::move(shape));
  for (double& v : a.storage()) v = u(rng);
  return a;
}

struct Setup {
  model::ModelConfig cfg;
  model::GraphContext graph;
  nd::ParamMap params;
  nd::Array x;
  std::vector<std::size_t> rows;
};

Setup setup(std::size_t batch, const std::string& ablation) {
  Setup s;
  const auto sd = data::generate_synthetic_panel(data::GeneratorSpec{}, 7);
  s.cfg.nodes = sd.panel.nodes();
  s.cfg.ablation = model::parse_ablation(ablation);
  s.graph = model::make_graph_context(sd.graph, s.cfg.d_pe);
  s.params = model::init_params(s.cfg, 1);
  s.x = uniform(2, {s.cfg.T_seg * batch * s.cfg.nodes, s.cfg.K});
  for (std::size_t r = 0; r < s.x.dim(0); r += 17) s.rows.push_back(r);
  return s;
}

void BM_Forward(benchmark::State& st) {
  const Setup s = setup(static_cast<std::size_t>(st.range(0)), "full");
  for (auto _ : st) benchmark::DoNotOptimize(model::predict_all(s.params, s.x, st.range(0), s.graph, s.cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& st) {
  const Setup s = setup(static_cast<std::size_t>(st.range(0)), "full");
  const nd::Array truth = uniform(3, {s.rows.size(), 1});
  const nd::Program prog = [&](nd::Tape& tape, const nd::VarMap& p) {
    const nd::Var y = model::forward(tape, p, s.x, st.range(0), s.graph, s.cfg, &s.rows);
    return train::hybrid_loss(y, tape.constant(truth), 1.0, 1.0);
  };
  for (auto _ : st) benchmark::DoNotOptimize(nd::evaluate_with_gradients(prog, s.params));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_MaskedAttention(benchmark::State& st) {
  const std::size_t n = 34, heads = 8, dk = 4, groups = static_cast<std::size_t>(st.range(0));
  const auto sd = data::generate_synthetic_panel(data::GeneratorSpec{}, 7);
  const auto graph = model::make_graph_context(sd.graph, 16);
  const nd::Array q = uniform(4, {groups * n, heads * dk}), k = uniform(5, {groups * n, heads * dk}),
                  v = uniform(6, {groups * n, heads * dk});
  for (auto _ : st) {
    nd::Tape tape;
    const nd::Var qv = tape.leaf(q), kv = tape.leaf(k), vv = tape.leaf(v);
    const nd::Var out = nd::masked_attention(qv, kv, vv, n, heads, 0.5, graph.mask);
    tape.backward(nd::sum(out));
    benchmark::DoNotOptimize(qv.grad());
  }
}
BENCHMARK(BM_MaskedAttention)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace
