#include "emrelax/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emrelax/errors.hpp"
#include "emrelax/spectral.hpp"

namespace emrelax {
namespace {

double inner(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

/// Solves (-lap + diag(c)) w = rhs by PCG; returns iterations used.
int solve_shifted_poisson(const ScalarField& c, const ScalarField& rhs, ScalarField& w, double rtol, int max_iter) {
  const double c_avg = c.mean();
  const auto apply = [&](const ScalarField& x) { return c * x - laplacian(x); };
  const auto precondition = [&](const ScalarField& r) {
    return apply_multiplier(r, [c_avg](const Mode& m) { return 1.0 / (m.kappa_sq + c_avg); });
  };

  ScalarField r = rhs - apply(w);
  const double target = rtol * l2_norm(rhs);
  if (l2_norm(r) <= target) return 0;
  ScalarField z = precondition(r);
  ScalarField p = z;
  double rz = inner(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    const ScalarField Ap = apply(p);
    const double alpha = rz / inner(p, Ap);
    w.axpy(alpha, p);
    r.axpy(-alpha, Ap);
    if (l2_norm(r) <= target) return it;
    z = precondition(r);
    const double rz_new = inner(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    p *= beta;
    p += z;
  }
  return max_iter;
}

void finish_fields(EquilibriumState& eq, const PressureLaw& law) {
  ScalarField hn = law.h(eq.n_e);
  eq.E_e = gradient(hn);
  eq.E_e *= -1.0;
  hn += -hn.mean();
  eq.phi_e = -hn;
}

}  // namespace

ScalarField elliptic_residual(const ScalarField& n, const ScalarField& b, const PressureLaw& law) {
  ScalarField F = n - b;
  F -= laplacian(law.h(n));
  return F;
}

EquilibriumState constant_equilibrium(const PeriodicGrid& grid, double b0) {
  require(b0 > 0.0, "constant doping must be positive");
  return EquilibriumState{ScalarField(grid, b0), ScalarField(grid, 0.0), VectorField(grid, grid.dim(), 0.0),
                          {0.0, 0.0, 0.0}, 0, {0.0}};
}

EquilibriumState solve_equilibrium(const ScalarField& b, const PressureLaw& law, const EquilibriumOptions& opts) {
  require(opts.tol > 0.0, "equilibrium tolerance must be positive");
  require(opts.max_iter > 0, "max_iter must be positive");
  require(b.min() > 0.0, "doping must be positive everywhere");
  const PeriodicGrid& grid = b.grid();

  const double b_norm = l2_norm(b);
  ScalarField n = b;
  ScalarField F = elliptic_residual(n, b, law);
  double res = l2_norm(F) / b_norm;

  EquilibriumState eq{n, ScalarField(grid), VectorField(grid, grid.dim()), opts.B_e, 0, {res}};

  int iter = 0;
  while (res > opts.tol) {
    if (iter >= opts.max_iter)
      fail(ErrorKind::NoConvergence, "equilibrium Newton did not reach tol after " + std::to_string(iter) +
                                         " iterations (relative residual " + std::to_string(res) + ")");
    ++iter;

    const ScalarField hp = law.dh(n);
    const ScalarField inv_hp = hp.map([](double v) { return 1.0 / v; });
    ScalarField w(grid, 0.0);
    const double rtol = std::min(opts.cg_rtol, std::max(1e-14, 0.1 * opts.tol / std::max(res, 1e-300)));
    solve_shifted_poisson(inv_hp, -F, w, rtol, opts.cg_max_iter);
    ScalarField dn = w * inv_hp;

    double step = 1.0;
    bool positive_seen = false;
    for (;;) {
      ScalarField trial = n;
      trial.axpy(step, dn);
      if (trial.min() > 0.0) {
        positive_seen = true;
        ScalarField Ft = elliptic_residual(trial, b, law);
        const double rt = l2_norm(Ft) / b_norm;
        if (rt < res) {
          n = std::move(trial);
          F = std::move(Ft);
          res = rt;
          break;
        }
      }
      step *= 0.5;
      if (step < std::ldexp(1.0, -10)) {
        if (!positive_seen)
          fail(ErrorKind::NegativeDensityIterate,
               "damping could not keep the density positive; doping too rough for this grid/law");
        fail(ErrorKind::NoConvergence, "line search stalled at relative residual " + std::to_string(res));
      }
    }
    eq.residual_history.push_back(res);
  }

  eq.n_e = std::move(n);
  eq.newton_iterations = iter;
  finish_fields(eq, law);
  return eq;
}

EquilibriumState solve_equilibrium(const DopingProfile& b, const PressureLaw& law, const PeriodicGrid& grid,
                                   const EquilibriumOptions& opts) {
  return solve_equilibrium(b.realize(grid), law, opts);
}

double EquilibriumResiduals::max_absolute() const { return std::max({elliptic, force, gauss, curl}); }

EquilibriumResiduals equilibrium_residuals(const EquilibriumState& eq, const ScalarField& b, const PressureLaw& law) {
  require_same_grid(eq.n_e.grid(), b.grid(), "equilibrium_residuals");
  const PeriodicGrid& g = b.grid();
  EquilibriumResiduals r{};
  r.scale = l2_norm(b);
  r.elliptic = l2_norm(elliptic_residual(eq.n_e, b, law));

  VectorField force = gradient(law.P(eq.n_e));
  force += eq.n_e * eq.E_e;
  r.force = l2_norm(force);

  r.gauss = l2_norm(divergence(eq.E_e) - (b - eq.n_e));
  r.curl = g.dim() >= 2 ? l2_norm(curl(eq.E_e)) : 0.0;
  return r;
}

}  // namespace emrelax
