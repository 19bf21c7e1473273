#include <gtest/gtest.h>

#include <cmath>

#include "../oracles/fd_newton.hpp"
#include "emrelax/doping.hpp"
#include "emrelax/equilibrium.hpp"
#include "emrelax/errors.hpp"
#include "emrelax/spectral.hpp"

using namespace emrelax;

namespace {

ScalarField cosine_doping(const PeriodicGrid& g, double base, double amp) {
  return DopingProfile(base, {CosineMode{{1, 0, 0}, amp, 0.0}}).realize(g);
}

}  // namespace

TEST(PressureLaw, ClosedForms) {
  const PressureLaw iso = PressureLaw::isothermal(2.0);
  EXPECT_DOUBLE_EQ(iso.h(std::exp(1.0)), 2.0);
  EXPECT_DOUBLE_EQ(iso.dh(4.0), 0.5);
  const PressureLaw g2(1.5, 2.0);
  EXPECT_DOUBLE_EQ(g2.P(2.0), 6.0);
  EXPECT_DOUBLE_EQ(g2.h(2.0), 6.0);
  EXPECT_DOUBLE_EQ(g2.dP(2.0), 6.0);
  EXPECT_THROW(PressureLaw(0.0, 2.0), Error);
  EXPECT_THROW(PressureLaw(1.0, 0.5), Error);
}

TEST(PressureLaw, EnthalpyDerivativeIsPressureSlopeOverDensity) {
  for (double gamma : {1.0, 1.4, 2.0, 3.0}) {
    const PressureLaw law(1.3, gamma);
    for (double n : {0.3, 1.0, 2.7}) {
      EXPECT_NEAR(law.dh(n), law.dP(n) / n, 1e-14);
      const double step = 1e-6;
      EXPECT_NEAR((law.h(n + step) - law.h(n - step)) / (2 * step), law.dh(n), 1e-8);
      EXPECT_NEAR((law.dh(n + step) - law.dh(n - step)) / (2 * step), law.d2h(n), 1e-7);
      EXPECT_NEAR(n * law.d2h(n), law.d2P(n) - law.dh(n), 1e-12);
    }
  }
}

TEST(Doping, RejectsNonPositiveLowerBound) {
  EXPECT_THROW(DopingProfile(1.0, {CosineMode{{1, 0, 0}, 1.0, 0.0}}), Error);
  EXPECT_THROW(DopingProfile(-1.0), Error);
  const DopingProfile ok(1.0, {CosineMode{{1, 0, 0}, 0.4, 0.0}, CosineMode{{2, 0, 0}, 0.3, 1.0}});
  EXPECT_NEAR(ok.lower_bound(), 0.3, 1e-15);
  EXPECT_GE(ok.realize(PeriodicGrid(1, 64)).min(), ok.lower_bound());
}

TEST(Equilibrium, ConstantDopingIsExact) {
  const PeriodicGrid g(1, 128);
  for (double gamma : {1.0, 2.0}) {
    const PressureLaw law(1.0, gamma);
    const ScalarField b(g, 2.0);
    const auto eq = solve_equilibrium(b, law);
    EXPECT_EQ(eq.newton_iterations, 0);
    EXPECT_LT((eq.n_e + (-2.0)).max_abs(), 1e-15);
    EXPECT_LT(eq.E_e.max_abs(), 1e-15);
    EXPECT_LT(eq.phi_e.max_abs(), 1e-15);
    const auto r = equilibrium_residuals(eq, b, law);
    EXPECT_LT(r.max_absolute(), 1e-13);
  }
}

TEST(Equilibrium, LinearizedIsothermalAgainstFiniteDifferenceNewton) {
  const PeriodicGrid g(1, 128);
  const PressureLaw law = PressureLaw::isothermal();
  const double delta = 1e-3;
  const ScalarField b = cosine_doping(g, 1.0, delta);
  const auto eq = solve_equilibrium(b, law);

  const std::vector<double> bs(b.values().begin(), b.values().end());
  const auto fd = oracle::fd_newton_equilibrium(
      bs, [](double n) { return std::log(n); }, [](double n) { return 1.0 / n; });

  double err_fd = 0.0, err_lin = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lin = 1.0 + 0.5 * delta * std::cos(g.coordinate(i)[0]);
    err_fd = std::max(err_fd, std::abs(eq.n_e[i] - fd[i]));
    err_lin = std::max(err_lin, std::abs(eq.n_e[i] - lin));
  }
  // Relative to the field, whose size is 1.
  EXPECT_LE(err_fd, 1e-4);
  EXPECT_LE(err_lin, 1e-4);
  // The linearization error is O(delta^2), far below the perturbation itself.
  EXPECT_LE(err_lin, 10 * delta * delta);
}

TEST(Equilibrium, GammaTwoMeetsTolerance) {
  const PeriodicGrid g(1, 128);
  const PressureLaw law(1.0, 2.0);
  const ScalarField b = cosine_doping(g, 1.0, 0.1);
  EquilibriumOptions opts;
  opts.tol = 1e-10;
  const auto eq = solve_equilibrium(b, law, opts);
  EXPECT_LE(l2_norm(elliptic_residual(eq.n_e, b, law)), opts.tol * l2_norm(b));
  EXPECT_GT(eq.n_e.min(), 0.0);
}

TEST(Equilibrium, ResidualsOfConvergedState) {
  const PeriodicGrid g(2, 32);
  const PressureLaw law(1.0, 1.4);
  const ScalarField b = DopingProfile(1.0, {CosineMode{{1, 0, 0}, 0.1, 0.0}, CosineMode{{1, 1, 0}, 0.05, 0.4}}).realize(g);
  const auto eq = solve_equilibrium(b, law);
  const auto r = equilibrium_residuals(eq, b, law);
  EXPECT_LE(r.elliptic / r.scale, 1e-9);
  EXPECT_LE(r.force / r.scale, 1e-9);
  EXPECT_LE(r.gauss / r.scale, 1e-9);
  EXPECT_LE(r.curl / r.scale, 1e-9);
}

TEST(Equilibrium, PerturbedStateHasLargeResidual) {
  const PeriodicGrid g(1, 64);
  const PressureLaw law = PressureLaw::isothermal();
  const ScalarField b = cosine_doping(g, 1.0, 0.1);
  auto eq = solve_equilibrium(b, law);
  eq.n_e += ScalarField::from_function(g, [](const Point& x) { return 0.01 * std::cos(x[0]); });
  EXPECT_GE(equilibrium_residuals(eq, b, law).elliptic, 1e-3);
}

TEST(Equilibrium, MeanIdentity) {
  const PeriodicGrid g(2, 32);
  const PressureLaw law(2.0, 1.4);
  const ScalarField b = DopingProfile(1.5, {CosineMode{{2, 1, 0}, 0.2, 0.3}}).realize(g);
  const auto eq = solve_equilibrium(b, law);
  EXPECT_NEAR(eq.n_e.integral(), b.integral(), 1e-10 * b.integral());
}

TEST(Equilibrium, MonotoneLoadForConstants) {
  const PeriodicGrid g(1, 32);
  const PressureLaw law(1.0, 2.0);
  const auto lo = solve_equilibrium(ScalarField(g, 1.0), law);
  const auto hi = solve_equilibrium(ScalarField(g, 1.3), law);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(lo.n_e[i], hi.n_e[i]);
}

TEST(Equilibrium, FieldMatchesGaussLawPotential) {
  const PeriodicGrid g(1, 128);
  const PressureLaw law(1.0, 1.4);
  const ScalarField b = cosine_doping(g, 1.0, 0.1);
  EquilibriumOptions opts;
  const auto eq = solve_equilibrium(b, law, opts);
  const VectorField from_gauss = gradient(poisson_solve(b - eq.n_e));
  EXPECT_LE((from_gauss - eq.E_e).max_abs(), 10 * opts.tol);
  EXPECT_LE((gradient(eq.phi_e) - eq.E_e).max_abs(), 1e-13);
  EXPECT_LE(std::abs(eq.phi_e.mean()), 1e-15);
}

TEST(Equilibrium, NewtonResidualDecreasesMonotonically) {
  const PeriodicGrid g(1, 64);
  for (double gamma : {1.0, 1.4, 3.0}) {
    const PressureLaw law(1.0, gamma);
    const auto eq = solve_equilibrium(cosine_doping(g, 1.0, 0.1), law);
    for (std::size_t i = 1; i < eq.residual_history.size(); ++i)
      EXPECT_LT(eq.residual_history[i], eq.residual_history[i - 1]);
  }
}

TEST(Equilibrium, IterationCapRaisesNoConvergence) {
  const PeriodicGrid g(1, 64);
  EquilibriumOptions opts;
  opts.max_iter = 1;
  try {
    solve_equilibrium(cosine_doping(g, 1.0, 0.5), PressureLaw::isothermal(), opts);
    FAIL() << "expected NoConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
  }
}

TEST(Equilibrium, InvalidOptionsAreRejected) {
  const PeriodicGrid g(1, 16);
  EquilibriumOptions opts;
  opts.tol = 0.0;
  EXPECT_THROW(solve_equilibrium(ScalarField(g, 1.0), PressureLaw::isothermal(), opts), Error);
  EXPECT_THROW(solve_equilibrium(ScalarField(g, -1.0), PressureLaw::isothermal()), Error);
}

TEST(Equilibrium, ConfiguredMagneticField) {
  const PeriodicGrid g(2, 16);
  EquilibriumOptions opts;
  opts.B_e = {0.0, 0.0, 0.7};
  const auto eq = solve_equilibrium(DopingProfile(1.0).realize(g), PressureLaw::isothermal(), opts);
  EXPECT_DOUBLE_EQ(eq.B_e[2], 0.7);
}
