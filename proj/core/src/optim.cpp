#include "rieif/ndgrad/optim.hpp"

#include <cmath>
#include <numbers>

#include "rieif/error.hpp"

namespace rieif::nd {

void AdamW::set_learning_rate(double lr) {
  if (!(lr >= 0.0)) throw ConfigError("AdamW: learning rate must be >= 0");
  options_.learning_rate = lr;
}

void AdamW::step(ParamMap& params, const ParamMap& grads) {
  ++steps_;
  const double lr = options_.learning_rate;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (auto& [name, p] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Array& g = git->second;
    if (g.shape() != p.shape()) {
      throw ShapeError("adamw_step: gradient " + shape_str(g.shape()) + " vs parameter '" + name + "' " +
                       shape_str(p.shape()));
    }
    auto [mit, fresh_m] = m_.try_emplace(name, p.shape(), 0.0);
    auto [vit, fresh_v] = v_.try_emplace(name, p.shape(), 0.0);
    Array& m = mit->second;
    Array& v = vit->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] -= lr * options_.weight_decay * p[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      p[i] -= lr * mh / (std::sqrt(vh) + options_.epsilon);
    }
  }
}

double cosine_lr(double base_lr, int epoch, int max_epochs) {
  if (max_epochs < 1 || epoch < 0 || epoch > max_epochs) {
    throw ConfigError("cosine_lr: need 0 <= epoch <= max_epochs and max_epochs >= 1");
  }
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / max_epochs));
}

double global_norm(const ParamMap& grads) {
  double ss = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.data()) ss += v * v;
  return std::sqrt(ss);
}

double clip_grad_norm(ParamMap& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip_grad_norm: max_norm must be > 0");
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& [name, g] : grads)
      for (double& v : g.storage()) v *= s;
  }
  return norm;
}

}  // namespace rieif::nd
