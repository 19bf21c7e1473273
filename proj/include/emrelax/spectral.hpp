#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "emrelax/grid.hpp"

namespace emrelax {

using Complex = std::complex<double>;

/// One stored Fourier mode of the half-complex (real-to-complex) layout.
struct Mode {
  std::size_t index;            ///< position in Spectrum::coeffs
  std::array<int, 3> k;         ///< integer wavenumber (signed; Nyquist stored as +n/2)
  std::array<double, 3> kappa;  ///< scaled wavenumber used by even-order symbols
  std::array<double, 3> kd;     ///< scaled wavenumber used by odd derivatives (Nyquist -> 0)
  double weight;                ///< Hermitian multiplicity: 2 for modes whose conjugate is not stored
  double kappa_sq;              ///< |kappa|^2
};

/// Unnormalized forward transform of a real field, stored half-complex.
class Spectrum {
 public:
  explicit Spectrum(const PeriodicGrid& grid);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::vector<Complex>& coeffs() noexcept { return coeffs_; }
  const std::vector<Complex>& coeffs() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t i) noexcept { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return coeffs_[i]; }
  std::size_t size() const noexcept { return coeffs_.size(); }

 private:
  PeriodicGrid grid_;
  std::vector<Complex> coeffs_;
};

/// Table of stored modes for a grid (cached; safe to call concurrently).
const std::vector<Mode>& modes(const PeriodicGrid& grid);

Spectrum forward(const ScalarField& f);
/// Inverse transform including the 1/size normalization.
ScalarField inverse(const Spectrum& s);

/// Applies a real Fourier multiplier m(mode) to f.
ScalarField apply_multiplier(const ScalarField& f, const std::function<double(const Mode&)>& symbol);

ScalarField partial(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& v);

/// Curl of the field embedded in three dimensions.
///
/// dim 3: 3 components in, 3 out. dim 2: an in-plane field (2 components)
/// maps to its out-of-plane component (1 component); an out-of-plane scalar
/// (1 component) maps to (d2 B, -d1 B).
VectorField curl(const VectorField& v);

/// Solves lap(phi) = rhs with the zero-mean gauge.
/// Throws NonZeroMeanRhs when |mean(rhs)| exceeds 1e-10 * max|rhs|.
ScalarField poisson_solve(const ScalarField& rhs);
VectorField poisson_solve(const VectorField& rhs);

/// 2/3-rule truncation: zeroes every mode with some |k_j| > n/3.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& v);
/// Pointwise product followed by 2/3-rule truncation.
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);

double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);

struct SobolevOrder {
  int s;
  explicit constexpr SobolevOrder(int order) : s(order) {}
};

/// Sum over multi-indices |alpha| <= s of |k^alpha|^2, i.e. the H^s symbol.
double sobolev_weight(const Mode& mode, int s);

/// (sum_{|alpha|<=s} ||d^alpha f||_{L2}^2)^{1/2}, computed from the spectrum.
double sobolev_norm(const ScalarField& f, SobolevOrder order);
double sobolev_norm(const VectorField& v, SobolevOrder order);
double sobolev_norm_squared(const ScalarField& f, SobolevOrder order);
double sobolev_norm_squared(const VectorField& v, SobolevOrder order);

/// Squared norms for every order 0..s_max from a single transform per component.
std::vector<double> sobolev_profile(const ScalarField& f, int s_max);
std::vector<double> sobolev_profile(const VectorField& v, int s_max);

}  // namespace emrelax
