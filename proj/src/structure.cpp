#include "emrelax/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "emrelax/errors.hpp"
#include "emrelax/spectral.hpp"

namespace emrelax {
namespace {

using Vec3 = std::array<double, 3>;

std::vector<Vec3> pointwise(const VectorField& v) {
  std::vector<Vec3> out(v.grid().size(), Vec3{0.0, 0.0, 0.0});
  for (int c = 0; c < std::min(v.components(), 3); ++c)
    for (std::size_t i = 0; i < out.size(); ++i) out[i][static_cast<std::size_t>(c)] = v[c][i];
  return out;
}

double max_abs_entry(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

StructureMatrices build_structure(const ScalarField& n, const VectorField& u, const ScalarField& n_e,
                                  const PressureLaw& law, double epsilon) {
  require_same_grid(n.grid(), n_e.grid(), "build_structure");
  require(u.components() == n.grid().dim(), "velocity needs dim components");
  if (!(n.min() > 0.0) || !(n_e.min() > 0.0))
    fail(ErrorKind::NonPositiveDensity, "structure matrices need positive densities");

  const PeriodicGrid& g = n.grid();
  const std::size_t size = g.size();
  const double e2 = epsilon * epsilon;

  const ScalarField hp = law.dh(n);
  const ScalarField Pp = law.dP(n);
  const auto uu = pointwise(u);
  const auto grad_ne = pointwise(gradient(n_e));
  const auto grad_hpe = pointwise(gradient(law.dh(n_e)));

  StructureMatrices m{g, epsilon, std::vector<Mat4>(size), {}, {}, std::vector<Mat4>(size), std::vector<Mat4>(size)};
  for (auto& a : m.A) a.resize(size);
  for (auto& a : m.Atilde) a.resize(size);

  for (std::size_t i = 0; i < size; ++i) {
    m.A0[i] = Mat4::Zero();
    m.A0[i](0, 0) = hp[i];
    for (int r = 1; r < 4; ++r) m.A0[i](r, r) = n[i];

    m.L_hat[i] = Mat4::Zero();
    for (int j = 0; j < 3; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const double uj = uu[i][ju];
      Mat4 a = Mat4::Zero();
      a(0, 0) = uj;
      a(0, j + 1) = n[i];
      a(j + 1, 0) = hp[i];
      Mat4 at = Mat4::Zero();
      at(0, 0) = hp[i] * uj;
      at(0, j + 1) = Pp[i];
      at(j + 1, 0) = Pp[i];
      for (int r = 1; r < 4; ++r) {
        a(r, r) = e2 * uj;
        at(r, r) = e2 * n[i] * uj;
      }
      m.A[ju][i] = a;
      m.Atilde[ju][i] = at;
      m.L_hat[i](0, j + 1) = grad_ne[i][ju];
      m.L_hat[i](j + 1, 0) = grad_hpe[i][ju];
    }
  }

  // B = sum_j d_j Atilde_j - 2 A0 L_hat, differentiating each entry field spectrally.
  for (std::size_t i = 0; i < size; ++i) m.B[i] = -2.0 * m.A0[i] * m.L_hat[i];
  ScalarField entry(g);
  for (int j = 0; j < g.dim(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        bool nonzero = false;
        for (std::size_t i = 0; i < size; ++i) {
          entry[i] = m.Atilde[ju][i](r, c);
          nonzero = nonzero || entry[i] != 0.0;
        }
        if (!nonzero) continue;
        const ScalarField d = partial(entry, j);
        for (std::size_t i = 0; i < size; ++i) m.B[i](r, c) += d[i];
      }
  }
  return m;
}

double antisymmetry_defect(const StructureMatrices& m) {
  double worst = 0.0;
  for (const Mat4& b : m.B) {
    const Eigen::Vector3d s = b.block<1, 3>(0, 1).transpose() + b.block<3, 1>(1, 0);
    worst = std::max(worst, s.norm());
  }
  return worst;
}

double symmetry_defect(const StructureMatrices& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.A0.size(); ++i) {
    worst = std::max(worst, max_abs_entry(m.A0[i] - m.A0[i].transpose()));
    for (const auto& at : m.Atilde) worst = std::max(worst, max_abs_entry(at[i] - at[i].transpose()));
  }
  return worst;
}

double symmetrizer_product_defect(const StructureMatrices& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.A0.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      // A0 A_j places eps^2 n u_j on the velocity block, matching Atilde_j.
      const Mat4 prod = m.A0[i] * m.A[j][i];
      worst = std::max(worst, max_abs_entry(m.Atilde[j][i] - prod));
    }
  return worst;
}

double min_eigenvalue_A0(const StructureMatrices& m) {
  double lo = std::numeric_limits<double>::infinity();
  for (const Mat4& a : m.A0) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(a, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

double taylor_remainder(const ScalarField& n_e, const ScalarField& N, const PressureLaw& law) {
  require_same_grid(n_e.grid(), N.grid(), "taylor_remainder");
  const ScalarField n = n_e + N;
  if (!(n.min() > 0.0)) fail(ErrorKind::NonPositiveDensity, "n_e + N must stay positive");
  ScalarField coeff = law.dh(n) - law.dh(n_e);
  coeff -= law.d2h(n_e) * N;
  return l2_norm(coeff * gradient(n_e));
}

std::vector<CheckResult> structure_audit(const ScalarField& n_e, const PressureLaw& law, double epsilon) {
  const PeriodicGrid& g = n_e.grid();
  const StructureMatrices m = build_structure(n_e, VectorField(g, g.dim(), 0.0), n_e, law, epsilon);
  const double grad_scale = std::max(1.0, gradient(n_e).max_norm());
  const double hp_min = law.dh(n_e).min();
  const double lower = std::min(hp_min, n_e.min());

  std::vector<CheckResult> out;
  const auto add = [&out](std::string name, double value, double threshold, bool ok) {
    out.push_back(CheckResult{std::move(name), value, threshold, ok});
  };
  const double sym = symmetry_defect(m);
  add("symmetry_A0_Atilde", sym, 1e-12, sym <= 1e-12);
  const double prod = symmetrizer_product_defect(m);
  const double prod_tol = 1e-12 * std::max(1.0, law.dP(n_e.max()));
  add("symmetrizer_product", prod, prod_tol, prod <= prod_tol);
  const double eig = min_eigenvalue_A0(m);
  add("A0_min_eigenvalue", eig, lower, eig >= lower * (1.0 - 1e-12) && eig > 0.0);
  const double anti = antisymmetry_defect(m);
  add("antisymmetry_defect", anti, 1e-11 * grad_scale, anti <= 1e-11 * grad_scale);
  return out;
}

}  // namespace emrelax
