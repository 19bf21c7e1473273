#pragma once

#include "emrelax/grid.hpp"

namespace emrelax {

/// gamma-law pressure P(n) = K n^gamma and its enthalpy h with h'(n) = P'(n)/n.
///
/// h(n) = K gamma/(gamma-1) n^(gamma-1) for gamma > 1 and K ln n for gamma = 1.
class PressureLaw {
 public:
  PressureLaw(double K, double gamma);
  static PressureLaw isothermal(double K = 1.0) { return PressureLaw(K, 1.0); }

  double K() const noexcept { return K_; }
  double gamma() const noexcept { return gamma_; }
  bool is_isothermal() const noexcept { return gamma_ == 1.0; }

  double P(double n) const;
  double dP(double n) const;
  double d2P(double n) const;
  double h(double n) const;
  double dh(double n) const;
  double d2h(double n) const;
  double sound_speed(double n) const;

  ScalarField P(const ScalarField& n) const;
  ScalarField dP(const ScalarField& n) const;
  ScalarField h(const ScalarField& n) const;
  ScalarField dh(const ScalarField& n) const;
  ScalarField d2h(const ScalarField& n) const;

 private:
  double K_;
  double gamma_;
};

}  // namespace emrelax
