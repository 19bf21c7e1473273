#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "../oracles/fd_rhs.hpp"
#include "emrelax/drift_diffusion.hpp"
#include "emrelax/errors.hpp"
#include "emrelax/relaxation.hpp"
#include "emrelax/spectral.hpp"
#include "helpers.hpp"

using namespace emrelax;
using testutil::max_diff;

namespace {

struct Fixture2D {
  PeriodicGrid g{2, 32};
  PressureLaw law = PressureLaw::isothermal();
  ScalarField b = DopingProfile(1.0, {CosineMode{{1, 0, 0}, 0.1, 0.0}, CosineMode{{0, 1, 0}, 0.05, 0.0}}).realize(g);
  EquilibriumState eq = solve_equilibrium(b, law);
  ModelContext ctx{law, b};
};

double max_tendency(const EMState& d) {
  return std::max({d.n.max_abs(), d.u.max_abs(), d.E.max_abs(), d.B.max_abs()});
}

oracle::Vec samples(const ScalarField& f) { return oracle::Vec(f.values().begin(), f.values().end()); }

std::vector<oracle::Vec> samples(const VectorField& v) {
  std::vector<oracle::Vec> out;
  for (const auto& c : v) out.push_back(samples(c));
  return out;
}

double rel_diff(const ScalarField& a, const oracle::Vec& b) {
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
    s = std::max(s, std::abs(b[i]));
  }
  return d / std::max(s, 1e-300);
}

}  // namespace

TEST(EMRhs, EquilibriumIsStationary) {
  Fixture2D f;
  const EMState s = equilibrium_em_state(f.eq);
  for (double eps : {1.0, 0.1, 0.01}) EXPECT_LE(max_tendency(em_rhs(s, f.ctx, eps)), 1e-10) << "eps " << eps;
}

TEST(EMRhs, ConstantStateWithConstantFieldIsStationary) {
  const PeriodicGrid g(3, 8);
  const ModelContext ctx{PressureLaw(1.0, 2.0), ScalarField(g, 1.5)};
  EMState s{ScalarField(g, 1.5), VectorField(g, 3, 0.0), VectorField(g, 3, 0.0), VectorField(g, 3, 0.4), 0.0};
  EXPECT_LE(max_tendency(em_rhs(s, ctx, 0.3)), 1e-14);
}

TEST(EMRhs, RejectsNonPositiveDensity) {
  Fixture2D f;
  EMState s = equilibrium_em_state(f.eq);
  s.n[3] = -0.1;
  try {
    em_rhs(s, f.ctx, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveDensity);
  }
}

TEST(EMRhs, MatchesFiniteDifferenceOracle) {
  const PeriodicGrid g(2, 8);
  std::mt19937_64 rng(21);
  const PressureLaw law(1.0, 1.4);
  for (int trial = 0; trial < 3; ++trial) {
    const ScalarField b = ScalarField(g, 1.0) + testutil::random_band_limited(g, 1, rng, 0.02);
    const ModelContext ctx{law, b};
    const EMState s{ScalarField(g, 1.0) + testutil::random_band_limited(g, 1, rng, 0.03),
                    testutil::random_vector(g, 2, 1, rng, 0.1), testutil::random_vector(g, 2, 1, rng, 0.1),
                    testutil::random_vector(g, 1, 1, rng, 0.1), 0.0};
    const double eps = 0.3;
    const EMState d = em_rhs(s, ctx, eps);
    const oracle::FdState o = oracle::fd_rhs(
        oracle::FdState{2, 8, samples(s.n), samples(s.u), samples(s.E), samples(s.B)},
        oracle::FdModel{eps, [&law](double n) { return law.h(n); }, samples(b)});
    EXPECT_LE(rel_diff(d.n, o.rho), 1e-6);
    for (int c = 0; c < 2; ++c) {
      EXPECT_LE(rel_diff(d.u[c], o.u[static_cast<std::size_t>(c)]), 1e-6);
      EXPECT_LE(rel_diff(d.E[c], o.E[static_cast<std::size_t>(c)]), 1e-6);
    }
    EXPECT_LE(rel_diff(d.B[0], o.B[0]), 1e-6);
  }
}

TEST(EMRhs, ThreeDimensionalOracle) {
  const PeriodicGrid g(3, 8);
  std::mt19937_64 rng(22);
  const PressureLaw law = PressureLaw::isothermal();
  const ScalarField b = ScalarField(g, 1.0) + testutil::random_band_limited(g, 1, rng, 0.01);
  const ModelContext ctx{law, b};
  const EMState s{ScalarField(g, 1.0) + testutil::random_band_limited(g, 1, rng, 0.01),
                  testutil::random_vector(g, 3, 1, rng, 0.05), testutil::random_vector(g, 3, 1, rng, 0.05),
                  testutil::random_vector(g, 3, 1, rng, 0.05), 0.0};
  const EMState d = em_rhs(s, ctx, 0.5);
  const auto o = oracle::fd_rhs(oracle::FdState{3, 8, samples(s.n), samples(s.u), samples(s.E), samples(s.B)},
                                oracle::FdModel{0.5, [&law](double n) { return law.h(n); }, samples(b)});
  EXPECT_LE(rel_diff(d.n, o.rho), 1e-6);
  for (int c = 0; c < 3; ++c) {
    EXPECT_LE(rel_diff(d.u[c], o.u[static_cast<std::size_t>(c)]), 1e-6);
    EXPECT_LE(rel_diff(d.E[c], o.E[static_cast<std::size_t>(c)]), 1e-6);
    EXPECT_LE(rel_diff(d.B[c], o.B[static_cast<std::size_t>(c)]), 1e-6);
  }
}

TEST(EMStep, EquilibriumIsFixedPoint) {
  Fixture2D f;
  const EMState s = equilibrium_em_state(f.eq);
  for (double eps : {1.0, 0.1, 0.01}) {
    RelaxationConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = 0.9 * em_stable_dt(s, f.ctx, cfg);
    const EMState next = em_step(s, f.ctx, cfg);
    EXPECT_LE(max_diff(next.n, s.n), 1e-10);
    EXPECT_LE(next.u.max_abs(), 1e-10);
    EXPECT_LE(max_diff(next.E, s.E), 1e-10);
    EXPECT_LE(max_diff(next.B, s.B), 1e-10);
  }
}

TEST(EMStep, PureMaxwellConservesEnergy) {
  const PeriodicGrid g(2, 32);
  std::mt19937_64 rng(23);
  const ModelContext ctx{PressureLaw::isothermal(), ScalarField(g, 1.0)};
  // Divergence-free E keeps the Gauss law with n = b.
  const VectorField E = curl(testutil::random_vector(g, 1, 4, rng, 0.2));
  EMState s{ScalarField(g, 1.0), VectorField(g, 2, 0.0), E, testutil::random_vector(g, 1, 4, rng, 0.2), 0.0};
  s.B[0] += -s.B[0].mean();
  RelaxationConfig cfg;
  cfg.epsilon = 0.05;
  cfg.couplings.transport = cfg.couplings.current = cfg.couplings.lorentz = false;
  cfg.couplings.pressure = cfg.couplings.field = false;
  cfg.dt = 0.5 * em_stable_dt(s, ctx, cfg);
  const auto energy = [](const EMState& x) {
    const double e = l2_norm(x.E), b = l2_norm(x.B);
    return e * e + b * b;
  };
  double prev = energy(s);
  for (int k = 0; k < 20; ++k) {
    s = em_step(s, ctx, cfg);
    const double cur = energy(s);
    EXPECT_NEAR(cur, prev, 1e-10 * prev);
    prev = cur;
  }
}

TEST(EMStep, FrozenCoefficientDecay) {
  const PeriodicGrid g(2, 16);
  const ModelContext ctx{PressureLaw::isothermal(), ScalarField(g, 1.0)};
  VectorField u(g, 2, 0.0);
  u[0] = ScalarField::from_function(g, [](const Point& x) { return 0.3 * std::sin(x[0]); });
  EMState s{ScalarField(g, 1.0), u, VectorField(g, 2, 0.0), VectorField(g, 1, 0.0), 0.0};
  RelaxationConfig cfg;
  cfg.epsilon = 0.2;
  cfg.couplings = Couplings{false, false, false, false, true, false, false};
  cfg.dt = 0.5 * em_stable_dt(s, ctx, cfg);
  const EMState next = em_step(s, ctx, cfg);
  const double expect = std::exp(-cfg.dt / (cfg.epsilon * cfg.epsilon)) * l2_norm(u);
  EXPECT_NEAR(l2_norm(next.u), expect, 1e-8 * expect);
}

TEST(EMStep, StepAboveStableLimitIsRejected) {
  Fixture2D f;
  const EMState s = equilibrium_em_state(f.eq);
  RelaxationConfig cfg;
  cfg.epsilon = 0.1;
  cfg.dt = 2.0 * em_stable_dt(s, f.ctx, cfg);
  try {
    em_step(s, f.ctx, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CflViolation);
  }
}

TEST(EMStep, GaussLawViolationAborts) {
  Fixture2D f;
  EMState s = equilibrium_em_state(f.eq);
  s.E[0] += ScalarField::from_function(f.g, [](const Point& x) { return 1e-3 * std::sin(x[0]); });
  RelaxationConfig cfg;
  cfg.epsilon = 0.5;
  cfg.dt = 0.5 * em_stable_dt(s, f.ctx, cfg);
  try {
    em_step(s, f.ctx, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConstraintDrift);
  }
}

TEST(EMStep, ConstraintsPropagate) {
  Fixture2D f;
  const ScalarField nbar0 = f.eq.n_e + realize_modes(f.g, {CosineMode{{1, 1, 0}, 0.01, 0.0}});
  RelaxationConfig cfg;
  cfg.epsilon = 0.1;
  EMState s = prepared_em_state(f.eq, nbar0, f.ctx, cfg.epsilon, VelocityInit::Zero);
  cfg.dt = 0.9 * em_stable_dt(s, f.ctx, cfg);
  double prev = em_constraints(s, f.b).gauss;
  for (int k = 0; k < 50; ++k) {
    s = em_step(s, f.ctx, cfg);
    const double cur = em_constraints(s, f.b).gauss;
    EXPECT_LE(cur - prev, 1e-10);
    prev = cur;
  }
}

TEST(EMStep, ThreeDimensionalDivergenceOfBStaysZero) {
  const PeriodicGrid g(3, 16);
  const PressureLaw law = PressureLaw::isothermal();
  const ScalarField b = DopingProfile(1.0, {CosineMode{{1, 0, 1}, 0.05, 0.0}}).realize(g);
  EquilibriumOptions opts;
  opts.B_e = {0.1, 0.0, 0.2};
  const auto eq = solve_equilibrium(b, law, opts);
  const ModelContext ctx{law, b};
  RelaxationConfig cfg;
  cfg.epsilon = 0.2;
  EMState s = prepared_em_state(eq, eq.n_e + realize_modes(g, {CosineMode{{1, 1, 0}, 0.01, 0.0}}), ctx, cfg.epsilon,
                                VelocityInit::Limit);
  cfg.dt = 0.9 * em_stable_dt(s, ctx, cfg);
  for (int k = 0; k < 10; ++k) s = em_step(s, ctx, cfg);
  const auto r = em_constraints(s, b);
  EXPECT_LE(r.div_B, 1e-10);
  EXPECT_LE(r.gauss, 1e-10);
}

TEST(MaxwellRotation, IsAnIsometry) {
  std::mt19937_64 rng(24);
  for (int dim : {2, 3}) {
    const PeriodicGrid g(dim, 16);
    for (int trial = 0; trial < 5; ++trial) {
      VectorField E = testutil::random_vector(g, dim, 3, rng);
      VectorField B = testutil::random_vector(g, dim == 2 ? 1 : 3, 3, rng);
      const double before = std::pow(l2_norm(E), 2) + std::pow(l2_norm(B), 2);
      const double theta = std::uniform_real_distribution<double>(0.0, 50.0)(rng);
      maxwell_rotate(E, B, theta);
      const double after = std::pow(l2_norm(E), 2) + std::pow(l2_norm(B), 2);
      EXPECT_NEAR(after, before, 1e-12 * before);
    }
  }
}

TEST(MaxwellRotation, PreservesLongitudinalPart) {
  std::mt19937_64 rng(25);
  const PeriodicGrid g(3, 16);
  VectorField E = testutil::random_vector(g, 3, 5, rng);
  VectorField B = curl(testutil::random_vector(g, 3, 5, rng));
  const ScalarField divE = divergence(E);
  maxwell_rotate(E, B, 0.37);
  EXPECT_LE(max_diff(divergence(E), divE), 1e-11);
  EXPECT_LE(divergence(B).max_abs(), 1e-11);
}

TEST(EMStep, RelaxationAloneContractsVelocity) {
  std::mt19937_64 rng(26);
  const PeriodicGrid g(2, 16);
  const ModelContext ctx{PressureLaw::isothermal(), ScalarField(g, 1.0)};
  for (double eps : {1.0, 0.3, 0.05}) {
    EMState s{ScalarField(g, 1.0), testutil::random_vector(g, 2, 3, rng, 0.1), VectorField(g, 2, 0.0),
              VectorField(g, 1, 0.0), 0.0};
    RelaxationConfig cfg;
    cfg.epsilon = eps;
    cfg.couplings = Couplings{false, false, false, false, true, false, false};
    cfg.dt = 0.5 * em_stable_dt(s, ctx, cfg);
    EXPECT_LE(l2_norm(em_step(s, ctx, cfg).u), l2_norm(s.u));
  }
}

TEST(EPRhs, EquilibriumIsStationary) {
  const PeriodicGrid g(1, 64);
  const PressureLaw law(1.0, 2.0);
  const ScalarField b = DopingProfile(1.0, {CosineMode{{1, 0, 0}, 0.1, 0.0}}).realize(g);
  const auto eq = solve_equilibrium(b, law);
  const ModelContext ctx{law, b};
  for (double eps : {1.0, 0.1, 0.01}) {
    const EPState d = ep_rhs(equilibrium_ep_state(eq), ctx, eps);
    EXPECT_LE(std::max(d.n.max_abs(), d.u.max_abs()), 1e-10) << "eps " << eps;
  }
}

TEST(EPRhs, MatchesFiniteDifferenceOracle) {
  std::mt19937_64 rng(27);
  for (int dim : {1, 2}) {
    const PeriodicGrid g(dim, 8);
    const PressureLaw law(1.0, 2.0);
    for (int trial = 0; trial < 3; ++trial) {
      const ScalarField b = ScalarField(g, 1.0) + testutil::random_band_limited(g, 1, rng, 0.02);
      ScalarField n = ScalarField(g, 1.0) + testutil::random_band_limited(g, 1, rng, 0.03);
      n += b.mean() - n.mean();
      const ModelContext ctx{law, b};
      const EPState s{n, testutil::random_vector(g, dim, 1, rng, 0.1), 0.0};
      const EPState d = ep_rhs(s, ctx, 0.25);
      const auto o = oracle::fd_rhs(oracle::FdState{dim, 8, samples(s.n), samples(s.u), {}, {}},
                                    oracle::FdModel{0.25, [&law](double v) { return law.h(v); }, samples(b)});
      EXPECT_LE(rel_diff(d.n, o.rho), 1e-6);
      for (int c = 0; c < dim; ++c) EXPECT_LE(rel_diff(d.u[c], o.u[static_cast<std::size_t>(c)]), 1e-6);
    }
  }
}

TEST(EPStep, ConservesMass) {
  const PeriodicGrid g(2, 32);
  const PressureLaw law = PressureLaw::isothermal();
  const ScalarField b = DopingProfile(1.0, {CosineMode{{1, 1, 0}, 0.1, 0.2}}).realize(g);
  const auto eq = solve_equilibrium(b, law);
  const ModelContext ctx{law, b};
  RelaxationConfig cfg;
  cfg.epsilon = 0.1;
  EPState s = prepared_ep_state(eq.n_e + realize_modes(g, {CosineMode{{2, 1, 0}, 0.01, 0.3}}), ctx, cfg.epsilon,
                                VelocityInit::Zero);
  cfg.dt = 0.9 * ep_stable_dt(s, ctx, cfg);
  const double m0 = s.n.integral();
  for (int k = 0; k < 20; ++k) {
    const double before = s.n.integral();
    s = ep_step(s, ctx, cfg);
    EXPECT_NEAR(s.n.integral(), before, 1e-12 * m0);
  }
}

TEST(EPStep, EquilibriumIsFixedPoint) {
  const PeriodicGrid g(1, 128);
  const PressureLaw law = PressureLaw::isothermal();
  const ScalarField b = DopingProfile(1.0, {CosineMode{{1, 0, 0}, 0.1, 0.0}}).realize(g);
  const auto eq = solve_equilibrium(b, law);
  const ModelContext ctx{law, b};
  const EPState s = equilibrium_ep_state(eq);
  for (double eps : {1.0, 0.1, 0.01}) {
    RelaxationConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = 0.9 * ep_stable_dt(s, ctx, cfg);
    const EPState next = ep_step(s, ctx, cfg);
    EXPECT_LE(max_diff(next.n, s.n), 1e-10);
    EXPECT_LE(next.u.max_abs(), 1e-10);
  }
}

TEST(PreparedData, EquilibriumInputGivesEquilibrium) {
  Fixture2D f;
  const EMState s = prepared_em_state(f.eq, f.eq.n_e, f.ctx, 0.3, VelocityInit::Limit);
  // Limited by the Newton tolerance of the equilibrium solve.
  EXPECT_LE(s.u.max_abs(), 1e-10);
  EXPECT_LE(max_diff(s.E, f.eq.E_e), 1e-10);
  EXPECT_LE(max_diff(s.n, f.eq.n_e), 0.0);
}

TEST(PreparedData, ConstraintsAndLimitField) {
  Fixture2D f;
  const ScalarField nbar0 = f.eq.n_e + realize_modes(f.g, {CosineMode{{2, 1, 0}, 0.01, 0.5}});
  const EMState s = prepared_em_state(f.eq, nbar0, f.ctx, 0.2, VelocityInit::Limit);
  const auto r = em_constraints(s, f.b);
  EXPECT_LE(r.gauss, 1e-11);
  EXPECT_LE(r.div_B, 1e-11);
  const LimitFields lf = reconstruct_fields(nbar0, f.ctx);
  EXPECT_LE(l2_norm(s.E - lf.E_bar), 1e-14);
  EXPECT_LE(l2_norm(s.u - lf.u_bar), 1e-14);
}

TEST(PreparedData, VelocityOptions) {
  Fixture2D f;
  const ScalarField nbar0 = f.eq.n_e + realize_modes(f.g, {CosineMode{{1, 0, 0}, 0.01, 0.0}});
  const VectorField ubar = reconstruct_fields(nbar0, f.ctx).u_bar;
  EXPECT_EQ(prepared_em_state(f.eq, nbar0, f.ctx, 0.5, VelocityInit::Zero).u.max_abs(), 0.0);
  const EMState raw = prepared_em_state(f.eq, nbar0, f.ctx, 0.5, VelocityInit::Raw);
  EXPECT_LE(max_diff(raw.u, 2.0 * ubar), 1e-14);
}

TEST(Boundedness, ShortRunStaysNearInitialSize) {
  Fixture2D f;
  const ScalarField nbar0 = f.eq.n_e + realize_modes(f.g, {CosineMode{{1, 1, 0}, 0.01, 0.0}});
  for (double eps : {0.4, 0.1}) {
    RelaxationConfig cfg;
    cfg.epsilon = eps;
    EMState s = prepared_em_state(f.eq, nbar0, f.ctx, eps, VelocityInit::Zero);
    cfg.dt = 0.9 * em_stable_dt(s, f.ctx, cfg);
    const auto size = [&](const EMState& x) {
      return std::sqrt(sobolev_norm_squared(x.n - f.eq.n_e, SobolevOrder(3)) +
                       eps * eps * sobolev_norm_squared(x.u, SobolevOrder(3)) +
                       sobolev_norm_squared(x.E - f.eq.E_e, SobolevOrder(3)) +
                       sobolev_norm_squared(x.B, SobolevOrder(3)));
    };
    const double w0 = size(s);
    double sup = w0;
    for (int k = 0; k < 100; ++k) {
      s = em_step(s, f.ctx, cfg);
      sup = std::max(sup, size(s));
    }
    EXPECT_LE(sup, 10.0 * w0);
  }
}

TEST(EMStep, CostDoesNotDependOnEpsilon) {
  Fixture2D f;
  const ScalarField nbar0 = f.eq.n_e + realize_modes(f.g, {CosineMode{{1, 1, 0}, 0.01, 0.0}});
  double dt = 1.0;
  for (double eps : {0.4, 0.05}) {
    RelaxationConfig cfg;
    cfg.epsilon = eps;
    dt = std::min(dt, 0.9 * em_stable_dt(prepared_em_state(f.eq, nbar0, f.ctx, eps, VelocityInit::Zero), f.ctx, cfg));
  }
  std::vector<double> cost;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    RelaxationConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = dt;
    std::vector<double> reps;
    for (int r = 0; r < 5; ++r) {
      EMState s = prepared_em_state(f.eq, nbar0, f.ctx, eps, VelocityInit::Zero);
      const auto t0 = std::chrono::steady_clock::now();
      for (int k = 0; k < 30; ++k) s = em_step(s, f.ctx, cfg);
      reps.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(reps.begin(), reps.end());
    cost.push_back(reps[2]);
  }
  const auto [lo, hi] = std::minmax_element(cost.begin(), cost.end());
  EXPECT_LT(*hi / *lo, 1.2);
}

TEST(FittedStep, DividesHorizon) {
  long steps = 0;
  const double dt = fitted_step(1.0, 0.03, &steps);
  EXPECT_EQ(steps, 34);
  EXPECT_NEAR(dt * steps, 1.0, 1e-15);
  EXPECT_LE(dt, 0.03);
}
