#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rieif::baselines {

enum class Method { Linear, Spline, Kalman };

Method parse_method(const std::string& s);
std::string method_name(Method m);

struct KalmanParams {
  double process_var = 1e-2;
  double obs_var = 1e-2;
};

struct BaselineSpec {
  Method method = Method::Linear;
  KalmanParams kalman;
  void validate() const;
};

struct Recovery {
  std::vector<double> values;
  bool fell_back = false;  // spline had fewer than 4 observed points and used linear fill
};

/// Masked runs filled linearly between bracketing observations; ends hold the nearest one.
/// `hidden[t] != 0` marks a masked sample. Throws ConfigError if nothing is observed.
std::vector<double> linear_interp_recover(std::span<const double> series, std::span<const std::uint8_t> hidden);

/// Natural cubic spline through the observed samples, clamped to the boundary values
/// outside them.
Recovery spline_recover(std::span<const double> series, std::span<const std::uint8_t> hidden);

/// Local-level model: forward filter (prediction-only at masked steps) then RTS smoothing.
std::vector<double> kalman_recover(std::span<const double> series, std::span<const std::uint8_t> hidden,
                                   const KalmanParams& params = {});

Recovery recover(const BaselineSpec& spec, std::span<const double> series, std::span<const std::uint8_t> hidden);

}  // namespace rieif::baselines
