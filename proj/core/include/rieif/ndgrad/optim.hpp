#pragma once

#include <cstdint>

#include "rieif/ndgrad/tape.hpp"

namespace rieif::nd {

struct AdamWOptions {
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;  // 0 recovers plain Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Decoupled-weight-decay Adam. Moments are keyed by parameter name.
class AdamW {
 public:
  explicit AdamW(AdamWOptions options = {}) : options_(options) {}

  /// One update in place. Every gradient must match its parameter's shape.
  void step(ParamMap& params, const ParamMap& grads);

  void set_learning_rate(double lr);
  const AdamWOptions& options() const noexcept { return options_; }
  std::int64_t step_count() const noexcept { return steps_; }
  const ParamMap& first_moment() const noexcept { return m_; }
  const ParamMap& second_moment() const noexcept { return v_; }

 private:
  AdamWOptions options_;
  std::int64_t steps_ = 0;
  ParamMap m_;
  ParamMap v_;
};

/// base_lr * 0.5 * (1 + cos(pi * epoch / max_epochs)).
double cosine_lr(double base_lr, int epoch, int max_epochs);

/// Scales all gradients by max_norm / g when the global L2 norm g exceeds max_norm.
/// Returns the pre-clip global norm.
double clip_grad_norm(ParamMap& grads, double max_norm);

double global_norm(const ParamMap& grads);

}  // namespace rieif::nd
