#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace emrelax {

using Point = std::array<double, 3>;

/// Uniform periodic grid on [0, L)^dim with the same number of points per axis.
///
/// Samples are stored row-major: axis 0 is the slowest index, axis dim-1 the
/// fastest. Coordinates of the missing axes (dim < 3) are reported as zero.
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int points_per_dim, double domain_length = 2.0 * std::numbers::pi);

  int dim() const noexcept { return dim_; }
  int points_per_dim() const noexcept { return n_; }
  double domain_length() const noexcept { return length_; }
  std::size_t size() const noexcept { return size_; }

  double spacing() const noexcept { return length_ / n_; }
  double cell_volume() const noexcept;
  double volume() const noexcept;
  /// Multiplies integer wavenumbers; 1 on the 2*pi torus.
  double wavenumber_scale() const noexcept { return 2.0 * std::numbers::pi / length_; }

  Point coordinate(std::size_t flat) const noexcept;
  std::array<int, 3> index(std::size_t flat) const noexcept;

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  int dim_;
  int n_;
  double length_;
  std::size_t size_;
};

/// Throws GridMismatch when the two grids differ.
void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where);

/// Real samples of a scalar function on a periodic grid.
class ScalarField {
 public:
  explicit ScalarField(const PeriodicGrid& grid, double fill = 0.0);
  ScalarField(const PeriodicGrid& grid, std::vector<double> values);

  static ScalarField from_function(const PeriodicGrid& grid, const std::function<double(const Point&)>& f);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double min() const;
  double max() const;
  double max_abs() const;
  double mean() const;
  /// Integral over the torus by the (spectrally exact) rectangle rule.
  double integral() const;
  bool all_finite() const;

  ScalarField map(const std::function<double(double)>& f) const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(const ScalarField& o);
  ScalarField& operator+=(double c);
  ScalarField& operator*=(double c);
  /// this += a * x
  ScalarField& axpy(double a, const ScalarField& x);

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double c, ScalarField a);
ScalarField operator*(ScalarField a, double c);
ScalarField operator+(ScalarField a, double c);
ScalarField operator-(ScalarField a);

/// A fixed number of scalar components on one grid.
///
/// Velocity and electric fields carry `dim` components. The magnetic field
/// carries 3 components in dim 3 and a single out-of-plane component in the
/// two-dimensional transverse-electric reduction.
class VectorField {
 public:
  VectorField(const PeriodicGrid& grid, int components, double fill = 0.0);
  explicit VectorField(std::vector<ScalarField> components);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int components() const noexcept { return static_cast<int>(comps_.size()); }

  ScalarField& operator[](int c) { return comps_[static_cast<std::size_t>(c)]; }
  const ScalarField& operator[](int c) const { return comps_[static_cast<std::size_t>(c)]; }

  auto begin() noexcept { return comps_.begin(); }
  auto end() noexcept { return comps_.end(); }
  auto begin() const noexcept { return comps_.begin(); }
  auto end() const noexcept { return comps_.end(); }

  /// Largest pointwise Euclidean length.
  double max_norm() const;
  double max_abs() const;
  bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double c);
  VectorField& axpy(double a, const VectorField& x);
  /// Multiplies every component pointwise by s.
  VectorField& scale_by(const ScalarField& s);

 private:
  PeriodicGrid grid_;
  std::vector<ScalarField> comps_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double c, VectorField a);
VectorField operator*(const ScalarField& s, VectorField v);

/// Pointwise dot product of two fields with equal component counts.
ScalarField dot(const VectorField& a, const VectorField& b);

}  // namespace emrelax
