#include "emrelax/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emrelax/drift_diffusion.hpp"
#include "emrelax/errors.hpp"
#include "emrelax/spectral.hpp"

namespace emrelax {
namespace {

// phi_1(z) = (e^z - 1)/z, phi_2(z) = (e^z - 1 - z)/z^2 for z <= 0.
double phi1(double z) { return std::abs(z) < 1e-8 ? 1.0 + z / 2.0 : std::expm1(z) / z; }

double phi2(double z) {
  if (std::abs(z) < 1e-4) return 0.5 + z / 6.0 + z * z / 24.0;
  return (std::expm1(z) - z) / (z * z);
}

void check_density(const ScalarField& n, const char* where) {
  if (!n.all_finite()) fail(ErrorKind::NonPositiveDensity, std::string(where) + ": density is not finite");
  const double m = n.min();
  if (m <= 0.0) fail(ErrorKind::NonPositiveDensity, std::string(where) + ": density reached " + std::to_string(m));
}

ScalarField advect_component(const VectorField& u, const ScalarField& f) {
  ScalarField acc(f.grid());
  for (int j = 0; j < u.components(); ++j) acc += u[j] * partial(f, j);
  return dealias(acc);
}

VectorField advection(const VectorField& u) {
  std::vector<ScalarField> out;
  for (const auto& c : u) out.push_back(advect_component(u, c));
  return VectorField(std::move(out));
}

/// Shared flux F = n u (dealiased); -div F feeds n, +F feeds E, so the
/// Gauss law is carried exactly.
VectorField mass_flux(const ScalarField& n, const VectorField& u) { return dealias(n * u); }

double max_wavenumber(const PeriodicGrid& g) {
  return g.wavenumber_scale() * std::sqrt(static_cast<double>(g.dim())) * std::floor(g.points_per_dim() / 3.0);
}

double force_dt(const ScalarField& n, const PressureLaw& law, double epsilon, double safety) {
  double c2 = 0.0;
  for (double v : n.values()) c2 = std::max(c2, law.dP(v));
  const double k = max_wavenumber(n.grid());
  const double omega = std::sqrt(c2 * k * k + n.max());
  return safety * std::min(epsilon / omega, 1.0 / (omega * omega));
}

double advective_dt(const ScalarField& n, const VectorField& u, const PressureLaw& law, double cfl) {
  const double speed = u.max_norm() + std::sqrt(law.dP(n.max()));
  return cfl * n.grid().spacing() / speed;
}

void require_dt(double dt, double limit, const char* where) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, std::string(where) + ": dt must be positive");
  if (dt > limit * (1.0 + 1e-12))
    fail(ErrorKind::CflViolation,
         std::string(where) + ": dt " + std::to_string(dt) + " exceeds stable limit " + std::to_string(limit));
}

/// Explicit part of the velocity tendency (everything except -u/eps^2).
VectorField velocity_forcing(const ScalarField& n, const VectorField& u, const VectorField& E, const VectorField* B,
                             const ModelContext& ctx, double epsilon, const Couplings& c) {
  const double inv_eps2 = 1.0 / (epsilon * epsilon);
  VectorField f(n.grid(), u.components(), 0.0);
  if (c.transport) f -= advection(u);
  if (c.pressure) f.axpy(-inv_eps2, gradient(ctx.law.h(n)));
  if (c.field) f.axpy(-inv_eps2, E);
  if (B != nullptr && c.lorentz) f.axpy(-epsilon * inv_eps2, lorentz(u, *B));
  return f;
}

struct Stage {
  ScalarField n;
  VectorField u_force;  ///< explicit velocity tendency
  VectorField current;  ///< n u entering the E equation
};

/// Explicit tendencies for the exponential step; B is frozen during it.
Stage em_stage(const ScalarField& n, const VectorField& u, const VectorField& E, const VectorField& B,
               const ModelContext& ctx, double epsilon, const Couplings& c) {
  VectorField F = mass_flux(n, u);
  ScalarField dn = c.transport ? -divergence(F) : ScalarField(n.grid(), 0.0);
  VectorField uf = velocity_forcing(n, u, E, &B, ctx, epsilon, c);
  if (!c.current) F *= 0.0;
  return Stage{std::move(dn), std::move(uf), std::move(F)};
}

VectorField exp_combine(const VectorField& u, double decay, const VectorField& g, double w) {
  VectorField out = u;
  out *= decay;
  out.axpy(w, g);
  return out;
}

}  // namespace

int magnetic_components(const PeriodicGrid& g) {
  require(g.dim() >= 2, "Euler-Maxwell needs dimension 2 or 3");
  return g.dim() == 3 ? 3 : 1;
}

VectorField lorentz(const VectorField& u, const VectorField& B) {
  const PeriodicGrid& g = u.grid();
  if (g.dim() == 2) {
    require(B.components() == 1, "2-D magnetic field has one component");
    std::vector<ScalarField> out;
    out.push_back(dealias(u[1] * B[0]));
    out.push_back(dealias(-(u[0] * B[0])));
    return VectorField(std::move(out));
  }
  require(g.dim() == 3 && B.components() == 3, "u x B needs a 3-D field");
  std::vector<ScalarField> out;
  out.push_back(dealias(u[1] * B[2] - u[2] * B[1]));
  out.push_back(dealias(u[2] * B[0] - u[0] * B[2]));
  out.push_back(dealias(u[0] * B[1] - u[1] * B[0]));
  return VectorField(std::move(out));
}

ScalarField ep_potential(const ScalarField& n, const ScalarField& b) { return poisson_solve(b - n); }

EMState em_rhs(const EMState& s, const ModelContext& ctx, double epsilon, const Couplings& c) {
  require(epsilon > 0.0, "epsilon must be positive");
  check_density(s.n, "em_rhs");
  Stage st = em_stage(s.n, s.u, s.E, s.B, ctx, epsilon, c);
  VectorField du = st.u_force;
  if (c.relaxation) du.axpy(-1.0 / (epsilon * epsilon), s.u);
  VectorField dE = st.current;
  VectorField dB(s.B.grid(), s.B.components(), 0.0);
  if (c.maxwell) {
    dE.axpy(1.0 / epsilon, curl(s.B));
    dB.axpy(-1.0 / epsilon, curl(s.E));
  }
  return EMState{std::move(st.n), std::move(du), std::move(dE), std::move(dB), 0.0};
}

EPState ep_rhs(const EPState& s, const ModelContext& ctx, double epsilon, const Couplings& c) {
  require(epsilon > 0.0, "epsilon must be positive");
  check_density(s.n, "ep_rhs");
  const VectorField E = gradient(ep_potential(s.n, ctx.b));
  ScalarField dn = c.transport ? -divergence(mass_flux(s.n, s.u)) : ScalarField(s.n.grid(), 0.0);
  VectorField du = velocity_forcing(s.n, s.u, E, nullptr, ctx, epsilon, c);
  if (c.relaxation) du.axpy(-1.0 / (epsilon * epsilon), s.u);
  return EPState{std::move(dn), std::move(du), 0.0};
}

void maxwell_rotate(VectorField& E, VectorField& B, double dt_over_eps) {
  const PeriodicGrid& g = E.grid();
  const int dim = g.dim();
  require(E.components() == dim && B.components() == magnetic_components(g), "maxwell_rotate: bad field shapes");

  // Embed as 3-vectors: 2-D uses E = (E1, E2, 0), B = (0, 0, Bz).
  std::array<Spectrum, 3> Eh{Spectrum(g), Spectrum(g), Spectrum(g)};
  std::array<Spectrum, 3> Bh{Spectrum(g), Spectrum(g), Spectrum(g)};
  for (int d = 0; d < dim; ++d) Eh[static_cast<std::size_t>(d)] = forward(E[d]);
  if (dim == 2) {
    Bh[2] = forward(B[0]);
  } else {
    for (int d = 0; d < 3; ++d) Bh[static_cast<std::size_t>(d)] = forward(B[d]);
  }

  const Complex I(0.0, 1.0);
  for (const Mode& m : modes(g)) {
    const double K = std::sqrt(m.kd[0] * m.kd[0] + m.kd[1] * m.kd[1] + m.kd[2] * m.kd[2]);
    if (K == 0.0) continue;
    const std::array<double, 3> k{m.kd[0] / K, m.kd[1] / K, m.kd[2] / K};
    const double th = K * dt_over_eps;
    const double c = std::cos(th);
    const double sn = std::sin(th);
    std::array<Complex, 3> e{}, b{};
    for (std::size_t d = 0; d < 3; ++d) {
      e[d] = Eh[d][m.index];
      b[d] = Bh[d][m.index];
    }
    const auto cross = [](const std::array<double, 3>& a, const std::array<Complex, 3>& v) {
      return std::array<Complex, 3>{a[1] * v[2] - a[2] * v[1], a[2] * v[0] - a[0] * v[2], a[0] * v[1] - a[1] * v[0]};
    };
    const Complex ek = k[0] * e[0] + k[1] * e[1] + k[2] * e[2];
    const Complex bk = k[0] * b[0] + k[1] * b[1] + k[2] * b[2];
    const auto kxb = cross(k, b);
    const auto kxe = cross(k, e);
    for (std::size_t d = 0; d < 3; ++d) {
      const Complex eL = ek * k[d];
      const Complex bL = bk * k[d];
      Eh[d][m.index] = eL + c * (e[d] - eL) + sn * I * kxb[d];
      Bh[d][m.index] = bL + c * (b[d] - bL) - sn * I * kxe[d];
    }
  }

  for (int d = 0; d < dim; ++d) E[d] = inverse(Eh[static_cast<std::size_t>(d)]);
  if (dim == 2) {
    B[0] = inverse(Bh[2]);
  } else {
    for (int d = 0; d < 3; ++d) B[d] = inverse(Bh[static_cast<std::size_t>(d)]);
  }
}

double em_stable_dt(const EMState& s, const ModelContext& ctx, const RelaxationConfig& cfg) {
  check_density(s.n, "em_stable_dt");
  double dt = std::min(force_dt(s.n, ctx.law, cfg.epsilon, cfg.force_safety),
                       advective_dt(s.n, s.u, ctx.law, cfg.cfl));
  const double bmax = s.B.max_norm();
  if (cfg.couplings.lorentz && bmax > 0.0) dt = std::min(dt, cfg.force_safety * cfg.epsilon / bmax);
  return dt;
}

double ep_stable_dt(const EPState& s, const ModelContext& ctx, const RelaxationConfig& cfg) {
  check_density(s.n, "ep_stable_dt");
  return std::min(force_dt(s.n, ctx.law, cfg.epsilon, cfg.force_safety), advective_dt(s.n, s.u, ctx.law, cfg.cfl));
}

ConstraintResiduals em_constraints(const EMState& s, const ScalarField& b) {
  ConstraintResiduals r;
  r.gauss = l2_norm(divergence(s.E) - (b - s.n));
  if (s.B.components() == 3 && s.B.grid().dim() == 3) r.div_B = l2_norm(divergence(s.B));
  return r;
}

EMState em_step(const EMState& s, const ModelContext& ctx, const RelaxationConfig& cfg) {
  const double eps = cfg.epsilon;
  const double dt = cfg.dt;
  require(eps > 0.0 && eps <= 1.0, "epsilon must lie in (0, 1]");
  require_dt(dt, em_stable_dt(s, ctx, cfg), "em_step");
  const Couplings& c = cfg.couplings;

  VectorField E = s.E;
  VectorField B = s.B;
  if (c.maxwell) maxwell_rotate(E, B, 0.5 * dt / eps);

  const double z = c.relaxation ? -dt / (eps * eps) : 0.0;
  const double decay = std::exp(z);
  const double w1 = dt * phi1(z);
  const double w2 = dt * phi2(z);

  const Stage s0 = em_stage(s.n, s.u, E, B, ctx, eps, c);
  ScalarField n1 = s.n;
  n1.axpy(dt, s0.n);
  VectorField u1 = exp_combine(s.u, decay, s0.u_force, w1);
  VectorField E1 = E;
  E1.axpy(dt, s0.current);
  check_density(n1, "em_step");

  const Stage s1 = em_stage(n1, u1, E1, B, ctx, eps, c);
  n1.axpy(0.5 * dt, s1.n - s0.n);
  u1.axpy(w2, s1.u_force - s0.u_force);
  E1.axpy(0.5 * dt, s1.current - s0.current);

  if (c.maxwell) maxwell_rotate(E1, B, 0.5 * dt / eps);

  EMState out{std::move(n1), std::move(u1), std::move(E1), std::move(B), s.t + dt};
  check_density(out.n, "em_step");
  if (!out.u.all_finite() || !out.E.all_finite() || !out.B.all_finite())
    fail(ErrorKind::NonPositiveDensity, "em_step produced non-finite fields");
  const ConstraintResiduals r = em_constraints(out, ctx.b);
  if (r.gauss > cfg.constraint_tol || r.div_B > cfg.constraint_tol)
    fail(ErrorKind::ConstraintDrift, "constraint residual " + std::to_string(std::max(r.gauss, r.div_B)) +
                                         " exceeds " + std::to_string(cfg.constraint_tol) + " at t = " +
                                         std::to_string(out.t));
  return out;
}

EPState ep_step(const EPState& s, const ModelContext& ctx, const RelaxationConfig& cfg) {
  const double eps = cfg.epsilon;
  const double dt = cfg.dt;
  require(eps > 0.0 && eps <= 1.0, "epsilon must lie in (0, 1]");
  require_dt(dt, ep_stable_dt(s, ctx, cfg), "ep_step");
  const Couplings& c = cfg.couplings;

  const double z = c.relaxation ? -dt / (eps * eps) : 0.0;
  const double decay = std::exp(z);
  const double w1 = dt * phi1(z);
  const double w2 = dt * phi2(z);

  const auto stage = [&](const ScalarField& n, const VectorField& u) {
    const VectorField E = gradient(ep_potential(n, ctx.b));
    ScalarField dn = c.transport ? -divergence(mass_flux(n, u)) : ScalarField(n.grid(), 0.0);
    return std::pair{std::move(dn), velocity_forcing(n, u, E, nullptr, ctx, eps, c)};
  };

  const auto [dn0, f0] = stage(s.n, s.u);
  ScalarField n1 = s.n;
  n1.axpy(dt, dn0);
  VectorField u1 = exp_combine(s.u, decay, f0, w1);
  check_density(n1, "ep_step");

  const auto [dn1, f1] = stage(n1, u1);
  n1.axpy(0.5 * dt, dn1 - dn0);
  u1.axpy(w2, f1 - f0);

  EPState out{std::move(n1), std::move(u1), s.t + dt};
  check_density(out.n, "ep_step");
  if (!out.u.all_finite()) fail(ErrorKind::NonPositiveDensity, "ep_step produced non-finite velocity");
  return out;
}

namespace {

VectorField initial_velocity(const ScalarField& nbar0, const ModelContext& ctx, double epsilon, VelocityInit init) {
  switch (init) {
    case VelocityInit::Zero: return VectorField(nbar0.grid(), nbar0.grid().dim(), 0.0);
    case VelocityInit::Limit: return reconstruct_fields(nbar0, ctx).u_bar;
    case VelocityInit::Raw: {
      VectorField u = reconstruct_fields(nbar0, ctx).u_bar;
      u *= 1.0 / epsilon;
      return u;
    }
  }
  fail(ErrorKind::InvalidArgument, "unknown velocity initialization");
}

}  // namespace

EMState prepared_em_state(const EquilibriumState& eq, const ScalarField& nbar0, const ModelContext& ctx,
                          double epsilon, VelocityInit init) {
  require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
  check_density(nbar0, "prepared_em_state");
  const PeriodicGrid& g = nbar0.grid();
  const int mb = magnetic_components(g);
  VectorField B(g, mb, 0.0);
  if (mb == 1) {
    B[0] += eq.B_e[2];
  } else {
    for (int d = 0; d < 3; ++d) B[d] += eq.B_e[static_cast<std::size_t>(d)];
  }
  return EMState{nbar0, initial_velocity(nbar0, ctx, epsilon, init), gradient(ep_potential(nbar0, ctx.b)),
                 std::move(B), 0.0};
}

EPState prepared_ep_state(const ScalarField& nbar0, const ModelContext& ctx, double epsilon, VelocityInit init) {
  require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
  check_density(nbar0, "prepared_ep_state");
  return EPState{nbar0, initial_velocity(nbar0, ctx, epsilon, init), 0.0};
}

EMState equilibrium_em_state(const EquilibriumState& eq) {
  const PeriodicGrid& g = eq.n_e.grid();
  const int mb = magnetic_components(g);
  VectorField B(g, mb, 0.0);
  if (mb == 1) {
    B[0] += eq.B_e[2];
  } else {
    for (int d = 0; d < 3; ++d) B[d] += eq.B_e[static_cast<std::size_t>(d)];
  }
  return EMState{eq.n_e, VectorField(g, g.dim(), 0.0), eq.E_e, std::move(B), 0.0};
}

EPState equilibrium_ep_state(const EquilibriumState& eq) {
  return EPState{eq.n_e, VectorField(eq.n_e.grid(), eq.n_e.grid().dim(), 0.0), 0.0};
}

double fitted_step(double t_end, double dt_max, long* steps) {
  require(t_end > 0.0 && dt_max > 0.0, "fitted_step needs positive arguments");
  const long k = std::max(1L, static_cast<long>(std::ceil(t_end / dt_max - 1e-9)));
  if (steps != nullptr) *steps = k;
  return t_end / static_cast<double>(k);
}

}  // namespace emrelax
