#include "rieif/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <json.hpp>

#include "rieif/dataio.hpp"
#include "rieif/error.hpp"

namespace rieif::metrics {

Regression regression_metrics(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size()) throw ShapeError("regression_metrics: length mismatch");
  if (gt.empty()) throw ConfigError("regression_metrics: no points");
  Regression r;
  r.n = gt.size();
  const double n = static_cast<double>(r.n);
  double mean = 0.0;
  for (double g : gt) mean += g;
  mean /= n;
  double abs_sum = 0.0, sq_sum = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const double e = gt[k] - pred[k];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    ss_tot += (gt[k] - mean) * (gt[k] - mean);
  }
  r.mae = abs_sum / n;
  r.mse = sq_sum / n;
  r.rmse = std::sqrt(r.mse);
  r.r2 = (r.n >= 2 && ss_tot > 0.0) ? 1.0 - sq_sum / ss_tot : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double recovery_snr(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size()) throw ShapeError("recovery_snr: length mismatch");
  double sig = 0.0, err = 0.0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    sig += gt[k] * gt[k];
    err += (gt[k] - pred[k]) * (gt[k] - pred[k]);
  }
  if (!(sig > 0.0)) throw ConfigError("recovery_snr: ground truth has zero energy");
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sig / err);
}

double capped_snr(double snr_db) { return std::min(snr_db, kSnrCap); }

MetricReport pooled_report(std::span<const double> pred, std::span<const double> gt,
                           std::span<const std::size_t> mask_sizes) {
  MetricReport r;
  r.reg = regression_metrics(pred, gt);
  r.snr_db = capped_snr(recovery_snr(pred, gt));
  double acc = 0.0;
  std::size_t off = 0, used = 0;
  for (std::size_t m : mask_sizes) {
    if (off + m > gt.size()) throw ShapeError("pooled_report: mask sizes exceed the sample count");
    double sig = 0.0;
    for (std::size_t k = off; k < off + m; ++k) sig += gt[k] * gt[k];
    if (m > 0 && sig > 0.0) {
      acc += capped_snr(recovery_snr(pred.subspan(off, m), gt.subspan(off, m)));
      ++used;
    }
    off += m;
  }
  r.masks = mask_sizes.size();
  r.macro_snr_db = used ? acc / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::string report_csv_header() {
  return "method,dataset,target,seed,rho,sigma,n_points,masks,mae,mse,rmse,r2,snr_db,macro_snr_db\n";
}

std::string report_csv_row(const MetricReport& r, bool mean_row) {
  using data::format_double;
  const std::string seed = mean_row ? "mean" : std::to_string(r.seed);
  return r.method + "," + r.dataset + "," + r.target + "," + seed + "," + format_double(r.rho) + "," +
         format_double(r.sigma) + "," + std::to_string(r.reg.n) + "," + std::to_string(r.masks) + "," +
         format_double(r.reg.mae) + "," + format_double(r.reg.mse) + "," + format_double(r.reg.rmse) + "," +
         format_double(r.reg.r2) + "," + format_double(r.snr_db) + "," + format_double(r.macro_snr_db) + "\n";
}

std::string reports_csv(const std::vector<MetricReport>& rows, const std::vector<MetricReport>& means) {
  std::string s = report_csv_header();
  for (const auto& r : rows) s += report_csv_row(r);
  for (const auto& r : means) s += report_csv_row(r, true);
  return s;
}

std::vector<MetricReport> mean_over_seeds(const std::vector<MetricReport>& rows) {
  using Key = std::tuple<std::string, double, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const MetricReport*>> groups;
  for (const auto& r : rows) {
    Key k{r.method, r.rho, r.sigma};
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  std::vector<MetricReport> out;
  for (const Key& k : order) {
    const auto& g = groups[k];
    MetricReport m = *g.front();
    const double c = static_cast<double>(g.size());
    m.seed = g.size();  // number of seeds averaged
    m.reg = {};
    m.snr_db = m.macro_snr_db = 0.0;
    std::size_t n = 0, masks = 0;
    for (const MetricReport* r : g) {
      m.reg.mae += r->reg.mae / c;
      m.reg.mse += r->reg.mse / c;
      m.reg.rmse += r->reg.rmse / c;
      m.reg.r2 += r->reg.r2 / c;
      m.snr_db += r->snr_db / c;
      m.macro_snr_db += r->macro_snr_db / c;
      n += r->reg.n;
      masks += r->masks;
    }
    m.reg.n = n;
    m.masks = masks;
    out.push_back(m);
  }
  return out;
}

std::string reports_json(const std::vector<MetricReport>& rows, const std::vector<MetricReport>& means) {
  // nlohmann prints the shortest round-trip form, so reruns are byte-identical
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  auto to_json = [&](const MetricReport& r, const char* seed_key) {
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["dataset"] = r.dataset;
    j["target"] = r.target;
    j[seed_key] = r.seed;
    j["rho"] = num(r.rho);
    j["sigma"] = num(r.sigma);
    j["n_points"] = r.reg.n;
    j["masks"] = r.masks;
    j["mae"] = num(r.reg.mae);
    j["mse"] = num(r.reg.mse);
    j["rmse"] = num(r.reg.rmse);
    j["r2"] = num(r.reg.r2);
    j["snr_db"] = num(r.snr_db);
    j["macro_snr_db"] = num(r.macro_snr_db);
    return j;
  };
  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) doc["rows"].push_back(to_json(r, "seed"));
  doc["mean_over_seeds"] = nlohmann::ordered_json::array();
  for (const auto& r : means) doc["mean_over_seeds"].push_back(to_json(r, "seeds"));
  return doc.dump(2) + "\n";
}

}  // namespace rieif::metrics
