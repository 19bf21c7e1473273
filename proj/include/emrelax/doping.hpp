#pragma once

#include <array>
#include <vector>

#include "emrelax/grid.hpp"

namespace emrelax {

/// One cosine component amplitude * cos(k . x + phase).
struct CosineMode {
  std::array<int, 3> wavevector{1, 0, 0};
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Sum of cosines on the grid: sum amplitude * cos(k . x + phase).
ScalarField realize_modes(const PeriodicGrid& grid, const std::vector<CosineMode>& modes);

/// Doping profile b(x) = b0 + sum amplitude * cos(k . x + phase).
///
/// Construction guarantees b(x) >= b0 - sum |amplitude| =: lower_bound() > 0.
class DopingProfile {
 public:
  explicit DopingProfile(double base, std::vector<CosineMode> modes = {});

  double base() const noexcept { return base_; }
  const std::vector<CosineMode>& modes() const noexcept { return modes_; }
  /// Guaranteed positive lower bound b_1.
  double lower_bound() const noexcept;
  bool is_constant() const noexcept;

  ScalarField realize(const PeriodicGrid& grid) const;

 private:
  double base_;
  std::vector<CosineMode> modes_;
};

}  // namespace emrelax
