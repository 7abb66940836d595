#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rieif/error.hpp"
#include "rieif/generator.hpp"
#include "rieif/maskproto.hpp"

namespace {

using namespace rieif::data;

std::vector<double> row(const RawPanel& p, std::size_t i) {
  return {p.values.begin() + static_cast<std::ptrdiff_t>(i * p.steps),
          p.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * p.steps)};
}

TEST(Generator, DefaultShapeAndAcyclicGraph) {
  const SyntheticData d = generate_synthetic_panel(GeneratorSpec{});
  EXPECT_EQ(d.panel.nodes(), 34u);
  EXPECT_EQ(d.panel.steps, 4096u);
  EXPECT_EQ(d.graph.size(), 34u);
  for (const auto& e : d.graph.edges()) EXPECT_LT(e.src, e.dst);
  for (double v : d.panel.values) ASSERT_TRUE(std::isfinite(v));
}

TEST(Generator, DeterministicPerSeed) {
  GeneratorSpec s;
  s.steps = 512;
  const SyntheticData a = generate_synthetic_panel(s, 11);
  const SyntheticData b = generate_synthetic_panel(s, 11);
  const SyntheticData c = generate_synthetic_panel(s, 12);
  EXPECT_EQ(a.panel.values, b.panel.values);
  EXPECT_EQ(a.graph.edges(), b.graph.edges());
  EXPECT_NE(a.panel.values, c.panel.values);
  EXPECT_EQ(a.panel.node_names, c.panel.node_names);
}

// Zero cross weights, no drivers: each node is AR(1) with its own coefficient.
TEST(Generator, ZeroWeightsGiveAr1) {
  GeneratorSpec s;
  s.nodes = 8;
  s.weight_min = s.weight_max = 0.0;
  s.trend_amplitude = 0.0;
  s.sine_amplitude = 0.0;
  s.root_ar = 0.7;
  const SyntheticData d = generate_synthetic_panel(s, 3);
  for (std::size_t i = 0; i < s.nodes; ++i) {
    EXPECT_NEAR(rieif::testing::lag1_autocorrelation(row(d.panel, i)), d.ar[i], 0.05) << "node " << i;
  }
}

TEST(Generator, ExactCopyChildIsPerfectlyCorrelated) {
  GeneratorSpec s;
  s.nodes = 4;
  s.steps = 1024;
  s.trend_amplitude = 0.0;
  s.edges = {{0, 1, 1.0, 0, false}};
  s.ar_override = {{1, 0.0}};
  s.noise_override = {{1, 0.0}};
  const SyntheticData d = generate_synthetic_panel(s, 5);
  EXPECT_NEAR(rieif::mask::pearson_corr(row(d.panel, 0), row(d.panel, 1)), 1.0, 1e-12);
}

TEST(Generator, SpecJsonRoundTripAndValidation) {
  GeneratorSpec s;
  s.nodes = 9;
  s.gain_std = 0.25;
  s.edges = {{0, 3, 0.5, 2, true}};
  s.ar_override = {{2, 0.1}};
  const GeneratorSpec t = parse_generator_spec(generator_spec_to_json(s));
  EXPECT_EQ(generator_spec_to_json(t), generator_spec_to_json(s));
  EXPECT_THROW(parse_generator_spec(R"({"N": 3})"), rieif::ConfigError);
  EXPECT_THROW(parse_generator_spec(R"({"T": 100})"), rieif::ConfigError);
  EXPECT_THROW(parse_generator_spec("{not json"), rieif::ParseError);
  const GeneratorSpec cyclic = parse_generator_spec(R"({"edges": [{"src": 1, "dst": 0}, {"src": 0, "dst": 1}]})");
  EXPECT_THROW(generate_synthetic_panel(cyclic), rieif::ConfigError);
}

}  // namespace
