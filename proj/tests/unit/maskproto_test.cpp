#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rieif/error.hpp"
#include "rieif/generator.hpp"
#include "rieif/maskproto.hpp"
#include "rieif/train.hpp"

namespace {

using namespace rieif::mask;
using rieif::data::RawPanel;

StandardizedPanel from_rows(const std::vector<std::vector<double>>& rows) {
  RawPanel raw;
  raw.steps = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    raw.node_names.push_back("n" + std::to_string(i));
    raw.values.insert(raw.values.end(), rows[i].begin(), rows[i].end());
  }
  raw.raw_missing = MissingMask(rows.size(), raw.steps);
  return rieif::data::zscore_standardize(raw, {0, raw.steps});
}

TEST(Pearson, Examples) {
  EXPECT_NEAR(pearson_corr(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 1.0, 1e-15);
  EXPECT_NEAR(pearson_corr(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(pearson_corr(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_EQ(pearson_corr(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_THROW(pearson_corr(std::vector<double>{1}, std::vector<double>{2}), rieif::ConfigError);
}

TEST(Pearson, MatchesDirectFormula) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t len = 5 + rng() % 300;
    std::vector<double> a(len), b(len);
    const double mix = n(rng);
    for (std::size_t t = 0; t < len; ++t) {
      a[t] = 3.0 + n(rng);
      b[t] = mix * a[t] + n(rng) - 1.0;
    }
    EXPECT_NEAR(pearson_corr(a, b), rieif::testing::pearson_sums(a, b), 1e-12);
  }
}

TEST(Pearson, SkipsFlaggedPairs) {
  const std::vector<double> a{1, 2, 100, 3, 4}, b{1, 3, -50, 2, 4};
  const std::vector<std::uint8_t> skip{0, 0, 1, 0, 0};
  EXPECT_NEAR(pearson_corr(a, b, skip, {}), 0.8, 1e-15);
  EXPECT_NEAR(pearson_corr(a, b, {}, skip), 0.8, 1e-15);
}

TEST(Proxies, Examples) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(500), noise(500);
  for (auto& v : x) v = n(rng);
  for (auto& v : noise) v = n(rng);
  const StandardizedPanel p = from_rows({x, x, noise});
  EXPECT_EQ(select_proxies(p, {0, 500}, 0, 0.9), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(select_proxies(p, {0, 500}, 2, 1.0).empty());
  EXPECT_THROW(select_proxies(p, {0, 500}, 0, 1.0 + 1e-9), rieif::ConfigError);

  // target correlated about 0.95 and 0.41 with two other nodes
  std::vector<double> u(4000), v(4000), w(4000);
  for (std::size_t t = 0; t < 4000; ++t) {
    u[t] = n(rng);
    v[t] = 0.95 * u[t] + std::sqrt(1 - 0.95 * 0.95) * n(rng);
    w[t] = 0.45 * u[t] + std::sqrt(1 - 0.45 * 0.45) * n(rng);
  }
  const StandardizedPanel q = from_rows({u, v, w});
  const auto c = correlation_matrix(q, {0, 4000});
  ASSERT_GT(c[2], 0.4);
  ASSERT_LT(c[2], 0.6);
  EXPECT_EQ(select_proxies(q, {0, 4000}, 0, 0.4), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(select_proxies(q, {0, 4000}, 0, 0.9), (std::vector<std::size_t>{1}));
}

TEST(BlindSpot, Examples) {
  const MaskSet whole = sample_blind_spot_mask(4, 40, 1, {3}, 0.4, {8, 40}, 32, 5);
  EXPECT_EQ(whole.block, (TimeRange{8, 40}));
  EXPECT_EQ(whole.m.count(), 64u);
  const MaskSet single = sample_blind_spot_mask(4, 40, 2, {}, 0.4, {0, 40}, 1, 5);
  EXPECT_EQ(single.m.count(), 1u);
  EXPECT_EQ(target_index_set(single.m).size(), 1u);
  EXPECT_EQ(sample_blind_spot_mask(4, 40, 1, {0, 2}, 0.4, {0, 40}, 7, 99),
            sample_blind_spot_mask(4, 40, 1, {0, 2}, 0.4, {0, 40}, 7, 99));
  EXPECT_THROW(sample_blind_spot_mask(4, 40, 1, {}, 0.4, {0, 10}, 11, 0), rieif::ConfigError);
}

TEST(BlindSpot, PlacementIsUniform) {
  std::vector<int> hits(5, 0);
  for (std::uint64_t s = 0; s < 5000; ++s) ++hits[sample_blind_spot_mask(2, 10, 0, {}, 0.5, {3, 10}, 3, s).block.begin - 3];
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(MaskedViewTest, ZeroFillKeepsTruth) {
  StandardizedPanel p = from_rows({{0, 1, 2, 3}, {3, 1, 4, 1}});
  p.y[1] = 1.7;
  MissingMask m(2, 4);
  m.set(0, 1);
  const MaskedView v = apply_mask(p, m);
  EXPECT_EQ(v.model(0, 1), 0.0);
  EXPECT_EQ(v.truth(0, 1), 1.7);
  EXPECT_TRUE(v.hidden(0, 1));
  EXPECT_EQ(v.model(1, 2), p.at(1, 2));
  EXPECT_FALSE(v.hidden(1, 2));
  for (std::size_t t = 0; t < 4; ++t) m.set(1, t);
  for (std::size_t t = 0; t < 4; ++t)
    for (double c : rieif::data::time_delay_embed(p, m, 1, t, 3, 1)) EXPECT_EQ(c, 0.0);
}

TEST(TargetIndexSet, Counts) {
  EXPECT_TRUE(target_index_set(MissingMask(3, 5)).empty());
  MissingMask m(3, 5);
  for (std::size_t i : {0, 2})
    for (std::size_t t = 1; t < 4; ++t) m.set(i, t);
  const auto idx = target_index_set(m);
  EXPECT_EQ(idx.size(), 6u);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(sample_blind_spot_mask(8, 20, 1, {2, 5}, 0.4, {0, 20}, 4, 3).m.count(), 12u);

  MissingMask raw(3, 5);
  raw.set(0, 2);
  EXPECT_EQ(target_index_set(m, &raw).size(), 5u);
  EXPECT_EQ(target_index_set(m, &raw, true).size(), 6u);
}

TEST(MaskExport, RoundTrip) {
  const std::vector<std::string> names{"a", "b", "c", "d"};
  const MaskSet ms = sample_blind_spot_mask(4, 50, 2, {0, 3}, 0.45, {10, 50}, 6, 77);
  const auto dir = std::filesystem::temp_directory_path();
  export_mask(ms, names, dir / "rieif_mask.csv", dir / "rieif_mask.json");
  const MaskSet back = import_mask(names, 50, dir / "rieif_mask.csv", dir / "rieif_mask.json");
  EXPECT_EQ(back, ms);
}

// The same conformance and leakage properties as the acceptance suite, at smaller scale.
TEST(Protocol, DefinitionOneAndLeakage) {
  rieif::data::GeneratorSpec gs;
  gs.nodes = 12;
  gs.steps = 600;
  const auto sd = rieif::data::generate_synthetic_panel(gs, 4);
  const auto ex = rieif::train::make_experiment(sd.panel, sd.graph, 0.8, 0.125, 32);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const std::size_t target = s % 12;
    const MaskSet ms = sample_blind_spot_mask(ex.panel, ex.fit, target, 0.4, ex.split.test, 16, s);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t t = 0; t < ex.panel.steps; ++t) {
        const bool want = ms.block.contains(t) &&
                          (i == target || std::find(ms.proxies.begin(), ms.proxies.end(), i) != ms.proxies.end());
        ASSERT_EQ(ms.m.missing(i, t), want);
      }
  }
  RawPanel perturbed = sd.panel;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 50.0);
  for (std::size_t i = 0; i < perturbed.nodes(); ++i)
    for (std::size_t t = ex.split.test.begin; t < perturbed.steps; ++t) perturbed.values[i * perturbed.steps + t] += n(rng);
  const auto ex2 = rieif::train::make_experiment(perturbed, sd.graph, 0.8, 0.125, 32);
  for (std::size_t target = 0; target < 12; ++target) EXPECT_EQ(ex.proxies(target, 0.4), ex2.proxies(target, 0.4));
}

}  // namespace
