#pragma once

// Sobolev norm by explicit multi-index enumeration: each d^alpha f is formed
// with dense differentiation matrices and its L2 norm taken by the rectangle rule.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "dense_periodic.hpp"

namespace oracle {

inline double sobolev_norm_squared_quadrature(const std::vector<double>& f, int dim, int n, int s) {
  const Eigen::MatrixXd D = cot_matrix(n);
  const double cell = std::pow(2.0 * std::numbers::pi / n, dim);
  double total = 0.0;
  std::array<int, 3> alpha{0, 0, 0};
  for (alpha[0] = 0; alpha[0] <= s; ++alpha[0])
    for (alpha[1] = 0; alpha[1] <= (dim > 1 ? s : 0); ++alpha[1])
      for (alpha[2] = 0; alpha[2] <= (dim > 2 ? s : 0); ++alpha[2]) {
        if (alpha[0] + alpha[1] + alpha[2] > s) continue;
        std::vector<double> g = f;
        for (int a = 0; a < dim; ++a)
          for (int k = 0; k < alpha[static_cast<std::size_t>(a)]; ++k) g = apply_axis(D, g, dim, n, a);
        double acc = 0.0;
        for (double v : g) acc += v * v;
        total += acc * cell;
      }
  return total;
}

}  // namespace oracle
