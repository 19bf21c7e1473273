#include "emrelax/pressure_law.hpp"

#include <cmath>

#include "emrelax/errors.hpp"

namespace emrelax {

PressureLaw::PressureLaw(double K, double gamma) : K_(K), gamma_(gamma) {
  require(std::isfinite(K) && K > 0.0, "pressure constant K must be positive");
  require(std::isfinite(gamma) && gamma >= 1.0, "adiabatic exponent gamma must be >= 1");
}

double PressureLaw::P(double n) const { return K_ * std::pow(n, gamma_); }
double PressureLaw::dP(double n) const { return K_ * gamma_ * std::pow(n, gamma_ - 1.0); }
double PressureLaw::d2P(double n) const {
  return is_isothermal() ? 0.0 : K_ * gamma_ * (gamma_ - 1.0) * std::pow(n, gamma_ - 2.0);
}

double PressureLaw::h(double n) const {
  if (is_isothermal()) return K_ * std::log(n);
  return K_ * gamma_ / (gamma_ - 1.0) * std::pow(n, gamma_ - 1.0);
}

double PressureLaw::dh(double n) const { return K_ * gamma_ * std::pow(n, gamma_ - 2.0); }
double PressureLaw::d2h(double n) const { return K_ * gamma_ * (gamma_ - 2.0) * std::pow(n, gamma_ - 3.0); }
double PressureLaw::sound_speed(double n) const { return std::sqrt(dP(n)); }

ScalarField PressureLaw::P(const ScalarField& n) const { return n.map([this](double v) { return P(v); }); }
ScalarField PressureLaw::dP(const ScalarField& n) const { return n.map([this](double v) { return dP(v); }); }
ScalarField PressureLaw::h(const ScalarField& n) const { return n.map([this](double v) { return h(v); }); }
ScalarField PressureLaw::dh(const ScalarField& n) const { return n.map([this](double v) { return dh(v); }); }
ScalarField PressureLaw::d2h(const ScalarField& n) const { return n.map([this](double v) { return d2h(v); }); }

}  // namespace emrelax
