#include "emrelax/doping.hpp"

#include <cmath>
#include <string>

#include "emrelax/errors.hpp"

namespace emrelax {

ScalarField realize_modes(const PeriodicGrid& grid, const std::vector<CosineMode>& modes) {
  const double scale = grid.wavenumber_scale();
  for (const auto& m : modes)
    for (int d = grid.dim(); d < 3; ++d)
      require(m.wavevector[static_cast<std::size_t>(d)] == 0, "mode wavevector exceeds grid dimension");
  return ScalarField::from_function(grid, [&](const Point& x) {
    double v = 0.0;
    for (const auto& m : modes) {
      const double arg = scale * (m.wavevector[0] * x[0] + m.wavevector[1] * x[1] + m.wavevector[2] * x[2]);
      v += m.amplitude * std::cos(arg + m.phase);
    }
    return v;
  });
}

DopingProfile::DopingProfile(double base, std::vector<CosineMode> modes) : base_(base), modes_(std::move(modes)) {
  require(std::isfinite(base) && base > 0.0, "doping base must be positive");
  require(lower_bound() > 0.0,
          "doping profile may reach non-positive values (b0 - sum|a| = " + std::to_string(lower_bound()) + ")");
}

double DopingProfile::lower_bound() const noexcept {
  double s = 0.0;
  for (const auto& m : modes_) s += std::abs(m.amplitude);
  return base_ - s;
}

bool DopingProfile::is_constant() const noexcept {
  for (const auto& m : modes_)
    if (m.amplitude != 0.0 && (m.wavevector[0] != 0 || m.wavevector[1] != 0 || m.wavevector[2] != 0)) return false;
  return true;
}

ScalarField DopingProfile::realize(const PeriodicGrid& grid) const {
  ScalarField b = realize_modes(grid, modes_);
  b += base_;
  return b;
}

}  // namespace emrelax
