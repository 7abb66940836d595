#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rieif::metrics {

struct Regression {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;  // NaN when the ground truth is constant
  std::size_t n = 0;
};

/// Standard definitions over paired samples; r2 uses SS_tot about the mean of `gt`.
Regression regression_metrics(std::span<const double> pred, std::span<const double> gt);

/// 10 log10(sum gt^2 / sum (gt - pred)^2). Perfect recovery gives +infinity.
double recovery_snr(std::span<const double> pred, std::span<const double> gt);

/// Value written to tables in place of +infinity.
inline constexpr double kSnrCap = 120.0;
double capped_snr(double snr_db);

struct MetricReport {
  std::string method;
  std::string dataset;
  std::string target;
  std::size_t seed = 0;
  double rho = 0.0;
  double sigma = 0.0;
  Regression reg;
  double snr_db = 0.0;
  double macro_snr_db = 0.0;  // mean of per-mask SNRs
  std::size_t masks = 0;
};

/// Pooled report over all (pred, gt) pairs plus the per-mask mean SNR. `mask_sizes`
/// partitions the pairs in order.
MetricReport pooled_report(std::span<const double> pred, std::span<const double> gt,
                           std::span<const std::size_t> mask_sizes);

std::string report_csv_header();
/// `mean_row` writes "mean" in the seed column.
std::string report_csv_row(const MetricReport& r, bool mean_row = false);
/// Header, one row per report, then the mean-over-seeds rows.
std::string reports_csv(const std::vector<MetricReport>& rows, const std::vector<MetricReport>& means);

/// Mean of each numeric field over seeds, for rows sharing (method, rho, sigma).
std::vector<MetricReport> mean_over_seeds(const std::vector<MetricReport>& rows);

/// {"rows":[...], "mean_over_seeds":[...]} with deterministic number formatting.
std::string reports_json(const std::vector<MetricReport>& rows, const std::vector<MetricReport>& means);

}  // namespace rieif::metrics
