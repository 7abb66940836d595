#include "rieif/ndgrad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "rieif/error.hpp"

namespace rieif::nd {

ParamMap finite_difference_gradient(const Program& program, const ParamMap& params, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_difference_gradient: step must be > 0");
  ParamMap probe = params;
  ParamMap grads;
  for (auto& [name, value] : probe) {
    Array g(value.shape(), 0.0);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + step;
      const double fp = evaluate(program, probe);
      value[i] = saved - step;
      const double fm = evaluate(program, probe);
      value[i] = saved;
      g[i] = (fp - fm) / (2.0 * step);
    }
    grads.emplace(name, std::move(g));
  }
  return grads;
}

double max_relative_error(const ParamMap& a, const ParamMap& b, double floor) {
  double worst = 0.0;
  for (const auto& [name, ga] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second.size() != ga.size()) {
      throw ShapeError("max_relative_error: parameter '" + name + "' missing or mismatched");
    }
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double x = ga[i], y = it->second[i];
      const double den = std::max({std::abs(x), std::abs(y), floor});
      worst = std::max(worst, std::abs(x - y) / den);
    }
  }
  return worst;
}

}  // namespace rieif::nd
