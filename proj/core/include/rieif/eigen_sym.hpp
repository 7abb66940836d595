#pragma once

#include <cstddef>
#include <vector>

namespace rieif {

struct SymEigen {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // n x n row-major, column k pairs with values[k]
};

/// Cyclic Jacobi rotations on a dense symmetric matrix (row-major n x n).
/// Intended for graphs of a few hundred nodes at most.
SymEigen symmetric_eigen(const std::vector<double>& a, std::size_t n, double tol = 1e-14,
                         int max_sweeps = 100);

}  // namespace rieif
