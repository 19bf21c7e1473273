#pragma once

#include <array>
#include <vector>

#include "emrelax/doping.hpp"
#include "emrelax/grid.hpp"
#include "emrelax/pressure_law.hpp"

namespace emrelax {

/// Stationary state (n_e, 0, E_e, B_e) with grad P(n_e) = -n_e E_e,
/// div E_e = b - n_e, curl E_e = 0 and constant B_e.
struct EquilibriumState {
  ScalarField n_e;
  ScalarField phi_e;  ///< zero mean, E_e = grad phi_e
  VectorField E_e;
  std::array<double, 3> B_e{0.0, 0.0, 0.0};
  int newton_iterations = 0;
  std::vector<double> residual_history;  ///< relative L2 residual after each accepted iterate
};

struct EquilibriumOptions {
  double tol = 1e-10;  ///< relative: ||-lap h(n) + n - b|| <= tol ||b||
  int max_iter = 50;
  std::array<double, 3> B_e{0.0, 0.0, 0.0};
  double cg_rtol = 1e-3;  ///< relative tolerance of each inner solve, tightened near convergence
  int cg_max_iter = 500;
};

/// Newton iteration for -lap h(n) + n = b from n = b.
///
/// Each Newton system (-lap(h'(n) .) + 1) dn = -F is solved for w = h'(n) dn,
/// where it becomes (-lap + 1/h'(n)) w = -F: symmetric positive definite, so
/// preconditioned CG applies with the spectral inverse of (-lap + 1/h'_avg).
EquilibriumState solve_equilibrium(const ScalarField& b, const PressureLaw& law, const EquilibriumOptions& opts = {});
EquilibriumState solve_equilibrium(const DopingProfile& b, const PressureLaw& law, const PeriodicGrid& grid,
                                   const EquilibriumOptions& opts = {});

/// The constant-doping closed form n_e = b0, E_e = 0.
EquilibriumState constant_equilibrium(const PeriodicGrid& grid, double b0);

struct EquilibriumResiduals {
  double elliptic;  ///< ||-lap h(n_e) + n_e - b||
  double force;     ///< ||grad P(n_e) + n_e E_e||
  double gauss;     ///< ||div E_e - (b - n_e)||
  double curl;      ///< ||curl E_e||, zero in 1-D
  double scale;     ///< ||b||, for relative comparisons

  double max_absolute() const;
  double max_relative() const { return max_absolute() / scale; }
};

EquilibriumResiduals equilibrium_residuals(const EquilibriumState& eq, const ScalarField& b, const PressureLaw& law);

/// F(n) = -lap h(n) + n - b.
ScalarField elliptic_residual(const ScalarField& n, const ScalarField& b, const PressureLaw& law);

}  // namespace emrelax
