#pragma once

#include <array>

#include "emrelax/equilibrium.hpp"
#include "emrelax/grid.hpp"
#include "emrelax/pressure_law.hpp"

namespace emrelax {

/// Pressure law and realized doping shared by every model evaluation.
struct ModelContext {
  PressureLaw law;
  ScalarField b;
};

/// Switches for individual terms; all on for the physical system.
struct Couplings {
  bool transport = true;   ///< (u . grad) u and div(n u)
  bool pressure = true;    ///< grad h(n)
  bool field = true;       ///< E (or grad phi) in the momentum equation
  bool lorentz = true;     ///< eps u x B
  bool relaxation = true;  ///< -u / eps^2
  bool maxwell = true;     ///< curl terms of the field equations
  bool current = true;     ///< n u in the E equation
};

struct RelaxationConfig {
  double epsilon = 1.0;
  double dt = 1e-3;
  double t_end = 1.0;
  double constraint_tol = 1e-8;
  double cfl = 0.4;
  double force_safety = 0.8;
  Couplings couplings{};
};

/// Euler-Maxwell unknowns. B has 3 components in 3-D and one
/// out-of-plane component in the 2-D transverse-electric reduction.
struct EMState {
  ScalarField n;
  VectorField u;
  VectorField E;
  VectorField B;
  double t = 0.0;
};

/// Euler-Poisson unknowns; the potential is recomputed from n.
struct EPState {
  ScalarField n;
  VectorField u;
  double t = 0.0;
};

/// Time derivatives of the Euler-Maxwell unknowns (t is unused).
EMState em_rhs(const EMState& s, const ModelContext& ctx, double epsilon, const Couplings& c = {});
EPState ep_rhs(const EPState& s, const ModelContext& ctx, double epsilon, const Couplings& c = {});

/// Potential with lap(phi) = b - n and zero mean.
ScalarField ep_potential(const ScalarField& n, const ScalarField& b);

/// Exact Maxwell flow (E, B)' = (curl B, -curl E) / eps over dt, modewise.
void maxwell_rotate(VectorField& E, VectorField& B, double dt_over_eps);

/// Largest admissible step for the current state.
double em_stable_dt(const EMState& s, const ModelContext& ctx, const RelaxationConfig& cfg);
double ep_stable_dt(const EPState& s, const ModelContext& ctx, const RelaxationConfig& cfg);

/// Half Maxwell rotation, exponential Runge-Kutta step on (n, u, E) with the
/// relaxation -u/eps^2 integrated exactly, half Maxwell rotation.
/// Throws CflViolation, NonPositiveDensity or ConstraintDrift.
EMState em_step(const EMState& s, const ModelContext& ctx, const RelaxationConfig& cfg);
EPState ep_step(const EPState& s, const ModelContext& ctx, const RelaxationConfig& cfg);

struct ConstraintResiduals {
  double gauss = 0.0;  ///< ||div E - (b - n)||
  double div_B = 0.0;  ///< ||div B||, identically zero in 2-D
};

ConstraintResiduals em_constraints(const EMState& s, const ScalarField& b);

/// Initial velocity choice for prepared data.
enum class VelocityInit {
  Limit,  ///< u0 = reconstructed limit velocity
  Zero,   ///< u0 = 0
  Raw,    ///< u0 = (limit velocity) / eps, the unscaled prescription
};

/// n0 = nbar0, E0 = grad psi with lap psi = b - nbar0, B0 = B_e.
EMState prepared_em_state(const EquilibriumState& eq, const ScalarField& nbar0, const ModelContext& ctx,
                          double epsilon, VelocityInit init = VelocityInit::Limit);
EPState prepared_ep_state(const ScalarField& nbar0, const ModelContext& ctx, double epsilon,
                          VelocityInit init = VelocityInit::Limit);

EMState equilibrium_em_state(const EquilibriumState& eq);
EPState equilibrium_ep_state(const EquilibriumState& eq);

/// Components of B for the given grid: 1 in 2-D, 3 in 3-D.
int magnetic_components(const PeriodicGrid& g);

/// eps u x B in the embedding used for B.
VectorField lorentz(const VectorField& u, const VectorField& B);

/// Largest step <= dt_max that divides t_end into a whole number of steps.
double fitted_step(double t_end, double dt_max, long* steps = nullptr);

}  // namespace emrelax
