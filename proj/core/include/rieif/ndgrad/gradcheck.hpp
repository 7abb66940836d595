#pragma once

#include "rieif/ndgrad/tape.hpp"

namespace rieif::nd {

/// Central-difference estimate (f(p+h) - f(p-h)) / 2h for every coordinate of every parameter.
/// Independent of the tape's backward pass; used to verify it.
ParamMap finite_difference_gradient(const Program& program, const ParamMap& params, double step);

/// max over all coordinates of |a-b| / max(|a|, |b|, floor). Keys must match.
double max_relative_error(const ParamMap& a, const ParamMap& b, double floor = 1e-8);

}  // namespace rieif::nd
