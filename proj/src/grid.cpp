#include "emrelax/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "emrelax/errors.hpp"

namespace emrelax {

PeriodicGrid::PeriodicGrid(int dim, int points_per_dim, double domain_length)
    : dim_(dim), n_(points_per_dim), length_(domain_length), size_(1) {
  require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
  require(points_per_dim >= 8 && points_per_dim % 2 == 0,
          "points_per_dim must be even and at least 8, got " + std::to_string(points_per_dim));
  require((points_per_dim & (points_per_dim - 1)) == 0, "points_per_dim must be a power of two");
  require(std::isfinite(domain_length) && domain_length > 0.0, "domain length must be positive");
  for (int d = 0; d < dim; ++d) size_ *= static_cast<std::size_t>(n_);
}

double PeriodicGrid::cell_volume() const noexcept { return std::pow(spacing(), dim_); }

double PeriodicGrid::volume() const noexcept { return std::pow(length_, dim_); }

std::array<int, 3> PeriodicGrid::index(std::size_t flat) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[static_cast<std::size_t>(d)] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
  return idx;
}

Point PeriodicGrid::coordinate(std::size_t flat) const noexcept {
  const auto idx = index(flat);
  Point x{0.0, 0.0, 0.0};
  for (int d = 0; d < dim_; ++d) x[static_cast<std::size_t>(d)] = idx[static_cast<std::size_t>(d)] * spacing();
  return x;
}

void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where) {
  if (!(a == b)) fail(ErrorKind::GridMismatch, std::string("fields live on different grids in ") + where);
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const PeriodicGrid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), "sample count does not match grid size");
}

ScalarField ScalarField::from_function(const PeriodicGrid& grid, const std::function<double(const Point&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.coordinate(i));
  return out;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double ScalarField::integral() const { return mean() * grid_.volume(); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField ScalarField::map(const std::function<double(double)>& f) const {
  ScalarField out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = f(values_[i]);
  return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::operator*=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
  return *this;
}

ScalarField& ScalarField::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

ScalarField& ScalarField::axpy(double a, const ScalarField& x) {
  require_same_grid(grid_, x.grid_, "ScalarField::axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }
ScalarField operator*(ScalarField a, double c) { return a *= c; }
ScalarField operator+(ScalarField a, double c) { return a += c; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

// ---------------------------------------------------------------------------

VectorField::VectorField(const PeriodicGrid& grid, int components, double fill) : grid_(grid) {
  require(components >= 0, "negative component count");
  comps_.assign(static_cast<std::size_t>(components), ScalarField(grid, fill));
}

VectorField::VectorField(std::vector<ScalarField> components)
    : grid_(components.empty() ? PeriodicGrid(1, 8) : components.front().grid()), comps_(std::move(components)) {
  require(!comps_.empty(), "VectorField needs at least one component to infer its grid");
  for (const auto& c : comps_) require_same_grid(grid_, c.grid(), "VectorField");
}

double VectorField::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    double s = 0.0;
    for (const auto& c : comps_) s += c[i] * c[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

double VectorField::max_abs() const {
  double m = 0.0;
  for (const auto& c : comps_) m = std::max(m, c.max_abs());
  return m;
}

bool VectorField::all_finite() const {
  return std::all_of(comps_.begin(), comps_.end(), [](const ScalarField& c) { return c.all_finite(); });
}

VectorField& VectorField::operator+=(const VectorField& o) {
  require(o.components() == components(), "component count mismatch");
  for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] += o.comps_[c];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  require(o.components() == components(), "component count mismatch");
  for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c] -= o.comps_[c];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

VectorField& VectorField::axpy(double a, const VectorField& x) {
  require(x.components() == components(), "component count mismatch");
  for (std::size_t c = 0; c < comps_.size(); ++c) comps_[c].axpy(a, x.comps_[c]);
  return *this;
}

VectorField& VectorField::scale_by(const ScalarField& s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double c, VectorField a) { return a *= c; }
VectorField operator*(const ScalarField& s, VectorField v) { return v.scale_by(s); }

ScalarField dot(const VectorField& a, const VectorField& b) {
  require(a.components() == b.components(), "dot: component count mismatch");
  ScalarField out(a.grid());
  for (int c = 0; c < a.components(); ++c) out += a[c] * b[c];
  return out;
}

}  // namespace emrelax
