#include "rieif/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "rieif/error.hpp"

namespace rieif::baselines {

Method parse_method(const std::string& s) {
  if (s == "linear") return Method::Linear;
  if (s == "spline") return Method::Spline;
  if (s == "kalman") return Method::Kalman;
  throw ConfigError("unknown baseline '" + s + "' (expected linear, spline or kalman)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Linear: return "linear";
    case Method::Spline: return "spline";
    case Method::Kalman: return "kalman";
  }
  return "?";
}

void BaselineSpec::validate() const {
  if (method == Method::Kalman && !(kalman.process_var > 0.0 && kalman.obs_var > 0.0)) {
    throw ConfigError("kalman baseline: noise variances must be > 0");
  }
}

namespace {

void check(std::span<const double> series, std::span<const std::uint8_t> hidden) {
  if (series.size() != hidden.size()) throw ShapeError("baseline: series and mask lengths differ");
}

std::vector<std::size_t> observed_times(std::span<const std::uint8_t> hidden) {
  std::vector<std::size_t> obs;
  for (std::size_t t = 0; t < hidden.size(); ++t)
    if (!hidden[t]) obs.push_back(t);
  return obs;
}

}  // namespace

std::vector<double> linear_interp_recover(std::span<const double> series, std::span<const std::uint8_t> hidden) {
  check(series, hidden);
  const auto obs = observed_times(hidden);
  if (obs.empty()) throw ConfigError("linear baseline: series has no observed samples");
  std::vector<double> out(series.begin(), series.end());
  const std::size_t n = series.size();
  for (std::size_t t = 0; t < obs.front(); ++t) out[t] = series[obs.front()];
  for (std::size_t t = obs.back() + 1; t < n; ++t) out[t] = series[obs.back()];
  for (std::size_t k = 0; k + 1 < obs.size(); ++k) {
    const std::size_t a = obs[k], b = obs[k + 1];
    const double ya = series[a], yb = series[b];
    for (std::size_t t = a + 1; t < b; ++t) {
      const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
      out[t] = ya + w * (yb - ya);
    }
  }
  return out;
}

Recovery spline_recover(std::span<const double> series, std::span<const std::uint8_t> hidden) {
  check(series, hidden);
  const auto obs = observed_times(hidden);
  Recovery r;
  if (obs.size() < 4) {
    r.values = linear_interp_recover(series, hidden);
    r.fell_back = true;
    return r;
  }
  const std::size_t m = obs.size();
  std::vector<double> x(m), y(m);
  for (std::size_t k = 0; k < m; ++k) {
    x[k] = static_cast<double>(obs[k]);
    y[k] = series[obs[k]];
  }
  // second derivatives with natural ends, tridiagonal solve (Thomas)
  std::vector<double> h(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) h[k] = x[k + 1] - x[k];
  std::vector<double> sub(m, 0.0), diag(m, 1.0), sup(m, 0.0), rhs(m, 0.0);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    sub[k] = h[k - 1];
    diag[k] = 2.0 * (h[k - 1] + h[k]);
    sup[k] = h[k];
    rhs[k] = 6.0 * ((y[k + 1] - y[k]) / h[k] - (y[k] - y[k - 1]) / h[k - 1]);
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double w = sub[k] / diag[k - 1];
    diag[k] -= w * sup[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  std::vector<double> M(m);
  M[m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) M[k] = (rhs[k] - sup[k] * M[k + 1]) / diag[k];

  r.values.assign(series.begin(), series.end());
  std::size_t seg = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!hidden[t]) continue;
    const double tt = static_cast<double>(t);
    if (tt <= x.front()) {
      r.values[t] = y.front();
      continue;
    }
    if (tt >= x.back()) {
      r.values[t] = y.back();
      continue;
    }
    while (x[seg + 1] < tt) ++seg;
    const double a = x[seg + 1] - tt, b = tt - x[seg], hk = h[seg];
    r.values[t] = M[seg] * a * a * a / (6.0 * hk) + M[seg + 1] * b * b * b / (6.0 * hk) +
                  (y[seg] / hk - M[seg] * hk / 6.0) * a + (y[seg + 1] / hk - M[seg + 1] * hk / 6.0) * b;
  }
  return r;
}

std::vector<double> kalman_recover(std::span<const double> series, std::span<const std::uint8_t> hidden,
                                   const KalmanParams& params) {
  check(series, hidden);
  if (!(params.process_var > 0.0 && params.obs_var > 0.0)) throw ConfigError("kalman baseline: variances must be > 0");
  const std::size_t n = series.size();
  std::vector<double> out(series.begin(), series.end());
  if (n == 0) return out;
  const auto obs = observed_times(hidden);
  if (obs.empty()) throw ConfigError("kalman baseline: series has no observed samples");
  const double q = params.process_var, r = params.obs_var;

  // diffuse-ish start at the first observation
  std::vector<double> mp(n), pp(n), mf(n), pf(n);
  double m = series[obs.front()], p = 1e6;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) p += q;
    mp[t] = m;
    pp[t] = p;
    if (!hidden[t]) {
      const double k = p / (p + r);
      m += k * (series[t] - m);
      p *= (1.0 - k);
    }
    mf[t] = m;
    pf[t] = p;
  }
  // Rauch-Tung-Striebel
  std::vector<double> ms(n);
  ms[n - 1] = mf[n - 1];
  for (std::size_t t = n - 1; t-- > 0;) {
    const double c = pf[t] / pp[t + 1];
    ms[t] = mf[t] + c * (ms[t + 1] - mp[t + 1]);
  }
  for (std::size_t t = 0; t < n; ++t)
    if (hidden[t]) out[t] = ms[t];
  return out;
}

Recovery recover(const BaselineSpec& spec, std::span<const double> series, std::span<const std::uint8_t> hidden) {
  spec.validate();
  switch (spec.method) {
    case Method::Linear: return {linear_interp_recover(series, hidden), false};
    case Method::Spline: return spline_recover(series, hidden);
    case Method::Kalman: return {kalman_recover(series, hidden, spec.kalman), false};
  }
  return {};
}

}  // namespace rieif::baselines
