#include "emrelax/drift_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emrelax/errors.hpp"
#include "emrelax/spectral.hpp"

namespace emrelax {
namespace {

double phi1(double z) { return std::abs(z) < 1e-8 ? 1.0 + z / 2.0 : std::expm1(z) / z; }

double phi2(double z) {
  if (std::abs(z) < 1e-4) return 0.5 + z / 6.0 + z * z / 24.0;
  return (std::expm1(z) - z) / (z * z);
}

/// Explicit part: lap(P(n) - c n) + div(n grad phi).
Spectrum explicit_part(const ScalarField& n, const ModelContext& ctx, double c) {
  ScalarField q = ctx.law.P(n);
  q.axpy(-c, n);
  const VectorField drift = dealias(n * gradient(ep_potential(n, ctx.b)));
  ScalarField r = laplacian(q);
  r += divergence(drift);
  return forward(r);
}

DDState single_step(const DDState& s, const ModelContext& ctx, double dt) {
  const double c = ctx.law.dP(s.n_bar.mean());
  const auto& table = modes(s.n_bar.grid());

  const Spectrum n0 = forward(s.n_bar);
  const Spectrum N0 = explicit_part(s.n_bar, ctx, c);
  Spectrum a(s.n_bar.grid());
  for (const Mode& m : table) {
    const double z = -c * m.kappa_sq * dt;
    a[m.index] = std::exp(z) * n0[m.index] + dt * phi1(z) * N0[m.index];
  }
  const ScalarField na = inverse(a);
  if (!(na.min() > 0.0) || !na.all_finite()) return DDState{na, s.t + dt};

  const Spectrum N1 = explicit_part(na, ctx, c);
  for (const Mode& m : table) {
    const double z = -c * m.kappa_sq * dt;
    a[m.index] += dt * phi2(z) * (N1[m.index] - N0[m.index]);
  }
  return DDState{inverse(a), s.t + dt};
}

}  // namespace

LimitFields reconstruct_fields(const ScalarField& n_bar, const ModelContext& ctx) {
  require_same_grid(n_bar.grid(), ctx.b.grid(), "reconstruct_fields");
  ScalarField phi = ep_potential(n_bar, ctx.b);
  VectorField E = gradient(phi);
  VectorField u = gradient(ctx.law.h(n_bar));
  u += E;
  u *= -1.0;
  return LimitFields{std::move(phi), std::move(E), std::move(u)};
}

ScalarField dd_rhs(const ScalarField& n_bar, const ModelContext& ctx) {
  ScalarField r = laplacian(ctx.law.P(n_bar));
  r += divergence(dealias(n_bar * gradient(ep_potential(n_bar, ctx.b))));
  return r;
}

double dd_stable_dt(const DDState& s, const ModelContext& ctx) {
  const ScalarField& n = s.n_bar;
  require(n.min() > 0.0, "drift-diffusion density must be positive");
  const PeriodicGrid& g = n.grid();
  const double kmax = g.wavenumber_scale() * std::sqrt(static_cast<double>(g.dim())) * (g.points_per_dim() / 2);
  const double field = gradient(ep_potential(n, ctx.b)).max_norm();
  double dt = 0.5 / (field * kmax + n.max());
  const double c = ctx.law.dP(n.mean());
  double spread = 0.0;
  for (double v : n.values()) spread = std::max(spread, std::abs(ctx.law.dP(v) - c));
  if (spread > 0.0) dt = std::min(dt, 1.0 / (kmax * kmax * spread));
  return dt;
}

DDState dd_step(const DDState& s, const ModelContext& ctx, double dt) {
  require(dt > 0.0, "dt must be positive");
  if (!(s.n_bar.min() > 0.0)) fail(ErrorKind::NonPositiveDensity, "drift-diffusion density is not positive");
  for (int halvings = 0; halvings <= 8; ++halvings) {
    const long pieces = 1L << halvings;
    const double h = dt / static_cast<double>(pieces);
    DDState cur = s;
    bool ok = true;
    for (long i = 0; i < pieces && ok; ++i) {
      cur = single_step(cur, ctx, h);
      ok = cur.n_bar.all_finite() && cur.n_bar.min() > 0.0;
    }
    if (ok) {
      cur.t = s.t + dt;
      return cur;
    }
  }
  fail(ErrorKind::NonPositiveDensity,
       "drift-diffusion step lost positivity after 8 halvings at t = " + std::to_string(s.t));
}

VectorField stream_potential(const ScalarField& n_bar, const VectorField& u_bar) {
  const PeriodicGrid& g = n_bar.grid();
  require(g.dim() >= 2, "stream potential needs dimension 2 or 3");
  return poisson_solve(curl(n_bar * u_bar));
}

StreamResidual stream_identity_residual(const ScalarField& n_bar, const VectorField& u_bar,
                                        const VectorField& dE_bar_dt) {
  const VectorField current = n_bar * u_bar;
  const VectorField H = stream_potential(n_bar, u_bar);
  VectorField r = dE_bar_dt - current;
  r -= curl(H);

  StreamResidual out;
  out.l2 = l2_norm(r);
  double mean_sq = 0.0;
  for (auto& c : r) {
    const double m = c.mean();
    mean_sq += m * m;
    c += -m;
  }
  out.harmonic = std::sqrt(mean_sq * n_bar.grid().volume());
  out.l2_without_harmonic = l2_norm(r);
  return out;
}

}  // namespace emrelax
