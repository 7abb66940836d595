#pragma once

// Reference computations written independently of the library, used as test oracles.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace rieif::testing {

struct DenseEigen {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // n x n row-major, column k pairs with values[k]
};

/// Eigen's self-adjoint solver on a row-major symmetric matrix.
DenseEigen dense_eigen(const std::vector<double>& a, std::size_t n);

/// All-pairs shortest paths; w is n x n with +inf for "no edge".
std::vector<double> floyd_warshall(std::vector<double> w, std::size_t n);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Minimum transport cost over every integer plan with the given integer margins.
/// Transportation polytopes with integer margins have integral vertices, so this is the
/// exact optimum. Returns the cost of the optimal plan (not normalised by total mass).
double transport_by_enumeration(const std::vector<int>& supply, const std::vector<int>& demand,
                                const std::vector<double>& cost);

/// Pearson's r from raw sums, n*Sxy - Sx*Sy over the product of root terms, in long double.
double pearson_sums(const std::vector<double>& a, const std::vector<double>& b);

double lag1_autocorrelation(const std::vector<double>& x);

/// Central differences of a scalar function of a vector.
std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h);

/// Per-head masked attention by direct loops. q, k, v are [rows = G*N, H*dk] row-major;
/// allowed is N x N. Returns the [G*N, H*dk] output and, through `alpha`, the [G*H, N, N] weights.
std::vector<double> naive_attention(const std::vector<double>& q, const std::vector<double>& k,
                                    const std::vector<double>& v, std::size_t groups, std::size_t nodes,
                                    std::size_t heads, std::size_t dk, double scale,
                                    const std::vector<std::uint8_t>& allowed, std::vector<double>* alpha = nullptr);

}  // namespace rieif::testing
