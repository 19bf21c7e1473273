#pragma once

// Dense periodic differentiation on [0, 2pi)^dim, independent of the FFT path.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// First-derivative matrix D_ij = 0.5 (-1)^(i-j) cot((x_i - x_j)/2), zero diagonal.
inline Eigen::MatrixXd cot_matrix(int n) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  const double h = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = 0.5 * sign / std::tan(0.5 * (i - j) * h);
    }
  return D;
}

/// Applies the 1-D matrix along `axis` of a row-major dim-dimensional array.
inline std::vector<double> apply_axis(const Eigen::MatrixXd& D, const std::vector<double>& f, int dim, int n,
                                      int axis) {
  std::vector<double> out(f.size(), 0.0);
  long stride = 1;
  for (int d = dim - 1; d > axis; --d) stride *= n;
  const long block = stride * n;
  for (long base = 0; base < static_cast<long>(f.size()); base += block)
    for (long off = 0; off < stride; ++off)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += D(i, j) * f[static_cast<std::size_t>(base + off + j * stride)];
        out[static_cast<std::size_t>(base + off + i * stride)] = s;
      }
  return out;
}

/// Dense matrix of the derivative along `axis` for the full tensor grid.
inline Eigen::MatrixXd axis_operator(int dim, int n, int axis) {
  const Eigen::MatrixXd D = cot_matrix(n);
  long size = 1;
  for (int d = 0; d < dim; ++d) size *= n;
  Eigen::MatrixXd M(size, size);
  std::vector<double> e(static_cast<std::size_t>(size), 0.0);
  for (long c = 0; c < size; ++c) {
    e[static_cast<std::size_t>(c)] = 1.0;
    const auto col = apply_axis(D, e, dim, n, axis);
    for (long r = 0; r < size; ++r) M(r, c) = col[static_cast<std::size_t>(r)];
    e[static_cast<std::size_t>(c)] = 0.0;
  }
  return M;
}

}  // namespace oracle
