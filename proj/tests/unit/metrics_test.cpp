#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "rieif/metrics.hpp"

namespace {

using namespace rieif::metrics;
using V = std::vector<double>;

TEST(Regression, Examples) {
  const Regression same = regression_metrics(V{1, -2, 3}, V{1, -2, 3});
  EXPECT_EQ(same.mae, 0.0);
  EXPECT_EQ(same.mse, 0.0);
  EXPECT_EQ(same.rmse, 0.0);
  EXPECT_EQ(same.r2, 1.0);
  EXPECT_EQ(same.n, 3u);
  EXPECT_NEAR(regression_metrics(V{2, 2, 2}, V{1, 2, 3}).r2, 0.0, 1e-15);
  const Regression r = regression_metrics(V{2, 0}, V{0, 2});
  EXPECT_DOUBLE_EQ(r.mse, 4.0);
  EXPECT_DOUBLE_EQ(r.mae, 2.0);
  EXPECT_DOUBLE_EQ(r.r2, -3.0);
  EXPECT_TRUE(std::isnan(regression_metrics(V{1, 2}, V{5, 5}).r2));
}

TEST(Snr, Examples) {
  EXPECT_NEAR(recovery_snr(V{1, 0}, V{2, 0}), 10.0 * std::log10(4.0), 1e-12);
  EXPECT_NEAR(recovery_snr(V{0, 0}, V{1, -1}), 0.0, 1e-12);
  EXPECT_EQ(recovery_snr(V{1, 2}, V{1, 2}), INFINITY);
  EXPECT_EQ(capped_snr(INFINITY), kSnrCap);
  EXPECT_EQ(capped_snr(3.5), 3.5);
  const V gt{0.3, -1.1, 2.4, 0.9}, pred{0.1, -0.6, 2.0, 1.5};
  V half(4);
  for (int k = 0; k < 4; ++k) half[k] = gt[k] + 0.5 * (pred[k] - gt[k]);
  EXPECT_NEAR(recovery_snr(half, gt) - recovery_snr(pred, gt), 20.0 * std::log10(2.0), 1e-12);
}

TEST(Metrics, Identities) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    V gt(50), pred(50);
    for (int k = 0; k < 50; ++k) {
      gt[k] = n(rng);
      pred[k] = gt[k] + 0.4 * n(rng);
    }
    const Regression r = regression_metrics(pred, gt);
    EXPECT_NEAR(r.rmse, std::sqrt(r.mse), 1e-12);
    double ms = 0.0;
    for (double g : gt) ms += g * g / 50.0;
    EXPECT_NEAR(recovery_snr(pred, gt), 10.0 * std::log10(ms / r.mse), 1e-10);
    V p2 = pred, g2 = gt;
    std::vector<int> idx(50);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int k = 0; k < 50; ++k) {
      p2[k] = pred[idx[k]];
      g2[k] = gt[idx[k]];
    }
    const Regression s = regression_metrics(p2, g2);
    EXPECT_NEAR(s.mse, r.mse, 1e-14);
    EXPECT_NEAR(s.mae, r.mae, 1e-14);
    EXPECT_NEAR(s.r2, r.r2, 1e-12);
    EXPECT_NEAR(recovery_snr(p2, g2), recovery_snr(pred, gt), 1e-12);
  }
}

TEST(Pooled, MicroAndMacroAverages) {
  const V gt{2, 0, 1, 1, -1}, pred{1, 0, 1, 0, -1};
  const std::vector<std::size_t> sizes{2, 3};
  const MetricReport r = pooled_report(pred, gt, sizes);
  EXPECT_EQ(r.masks, 2u);
  EXPECT_EQ(r.reg.n, 5u);
  EXPECT_NEAR(r.snr_db, 10.0 * std::log10(7.0 / 2.0), 1e-12);
  const double a = 10.0 * std::log10(4.0), b = 10.0 * std::log10(3.0);
  EXPECT_NEAR(r.macro_snr_db, 0.5 * (a + b), 1e-12);
}

TEST(Reports, CsvAndJson) {
  MetricReport a;
  a.method = "linear";
  a.dataset = "synthetic";
  a.target = "all";
  a.rho = 0.4;
  a.reg = regression_metrics(V{1, 0}, V{2, 0});
  a.snr_db = 6.0;
  MetricReport b = a;
  b.seed = 1;
  b.snr_db = 8.0;
  const auto means = mean_over_seeds({a, b});
  ASSERT_EQ(means.size(), 1u);
  EXPECT_DOUBLE_EQ(means[0].snr_db, 7.0);
  const std::string csv = reports_csv({a, b}, means);
  EXPECT_EQ(csv.substr(0, csv.find('\n') + 1), report_csv_header());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find(",mean,"), std::string::npos);
  const auto j = nlohmann::json::parse(reports_json({a, b}, means));
  EXPECT_EQ(j.at("rows").size(), 2u);
  EXPECT_EQ(j.at("mean_over_seeds").size(), 1u);
  EXPECT_EQ(reports_json({a, b}, means), reports_json({a, b}, means));
}

}  // namespace
