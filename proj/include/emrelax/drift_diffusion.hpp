#pragma once

#include "emrelax/grid.hpp"
#include "emrelax/pressure_law.hpp"
#include "emrelax/relaxation.hpp"

namespace emrelax {

struct DDState {
  ScalarField n_bar;
  double t = 0.0;
};

/// phi_bar (lap phi_bar = b - n_bar, zero mean), E_bar = grad phi_bar and
/// u_bar = -grad h(n_bar) - grad phi_bar.
struct LimitFields {
  ScalarField phi_bar;
  VectorField E_bar;
  VectorField u_bar;
};

LimitFields reconstruct_fields(const ScalarField& n_bar, const ModelContext& ctx);

/// d/dt n_bar = lap P(n_bar) + div(n_bar grad phi_bar).
ScalarField dd_rhs(const ScalarField& n_bar, const ModelContext& ctx);

/// Stable step for the explicit drift and the pressure correction.
double dd_stable_dt(const DDState& s, const ModelContext& ctx);

/// One exponential Runge-Kutta step with the linear part P'(mean n) lap
/// integrated exactly. On loss of positivity the step is retried as 2, 4, ...
/// substeps, at most 8 halvings, then NonPositiveDensity is thrown.
DDState dd_step(const DDState& s, const ModelContext& ctx, double dt);

/// H_bar with lap H_bar = curl(n_bar u_bar), divergence free and zero mean.
/// 2-D: a single out-of-plane component; 3-D: three components.
VectorField stream_potential(const ScalarField& n_bar, const VectorField& u_bar);

struct StreamResidual {
  double l2 = 0.0;        ///< ||dE/dt - n u - curl H||
  double harmonic = 0.0;  ///< |mean(n u)| times sqrt(volume); the part no potential can absorb
  double l2_without_harmonic = 0.0;
};

/// Residual of dE_bar/dt - n_bar u_bar = curl H_bar given a time derivative of E_bar.
StreamResidual stream_identity_residual(const ScalarField& n_bar, const VectorField& u_bar,
                                        const VectorField& dE_bar_dt);

}  // namespace emrelax
