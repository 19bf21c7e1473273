#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emrelax/grid.hpp"
#include "emrelax/pressure_law.hpp"

namespace emrelax {

using Mat4 = Eigen::Matrix<double, 4, 4, Eigen::DontAlign>;

/// Pointwise 4x4 matrix fields of the quasilinear Euler part, for the state
/// vector (N, u1, u2, u3). Missing spatial directions (dim < 3) carry zero
/// velocity and zero derivatives.
struct StructureMatrices {
  PeriodicGrid grid;
  double epsilon;
  std::vector<Mat4> A0;                   ///< diag(h'(n), n, n, n)
  std::array<std::vector<Mat4>, 3> A;     ///< [[u_j, n e_j^T], [h'(n) e_j, eps^2 u_j I]]
  std::array<std::vector<Mat4>, 3> Atilde;  ///< [[h' u_j, P' e_j^T], [P' e_j, eps^2 n u_j I]]
  std::vector<Mat4> L_hat;                ///< [[0, grad n_e^T], [grad h'(n_e), 0]]
  std::vector<Mat4> B;                    ///< sum_j d_j Atilde_j - 2 A0 L_hat
};

/// Builds all matrix fields; derivatives are spectral. Throws NonPositiveDensity.
StructureMatrices build_structure(const ScalarField& n, const VectorField& u, const ScalarField& n_e,
                                  const PressureLaw& law, double epsilon = 1.0);

/// max over points of ||B12^T + B21||_F.
double antisymmetry_defect(const StructureMatrices& m);

/// max over points and j of the largest entry of |M - M^T| for A0 and Atilde_j.
double symmetry_defect(const StructureMatrices& m);

/// max over points and j of the largest entry of |Atilde_j - A0 A_j|.
double symmetrizer_product_defect(const StructureMatrices& m);

/// Smallest eigenvalue of A0 over the grid.
double min_eigenvalue_A0(const StructureMatrices& m);

/// ||(h'(n_e + N) - h'(n_e) - h''(n_e) N) grad n_e||_{L2}.
double taylor_remainder(const ScalarField& n_e, const ScalarField& N, const PressureLaw& law);

struct CheckResult {
  std::string name;
  double value;
  double threshold;
  bool passed;
};

/// Symmetry, positivity and anti-symmetry checks at the equilibrium n = n_e, u = 0.
std::vector<CheckResult> structure_audit(const ScalarField& n_e, const PressureLaw& law, double epsilon = 1.0);

}  // namespace emrelax
