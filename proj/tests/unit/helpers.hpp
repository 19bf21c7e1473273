#pragma once

#include <cmath>
#include <random>

#include "emrelax/grid.hpp"

namespace testutil {

/// Random trigonometric polynomial with every |k_j| <= kmax.
inline emrelax::ScalarField random_band_limited(const emrelax::PeriodicGrid& g, int kmax, std::mt19937_64& rng,
                                                double scale = 1.0) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  emrelax::ScalarField f(g, 0.0);
  const int k1 = g.dim() > 1 ? kmax : 0;
  const int k2 = g.dim() > 2 ? kmax : 0;
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = -k1; b <= k1; ++b)
      for (int c = -k2; c <= k2; ++c) {
        const double A = scale * amp(rng);
        const double p = phase(rng);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const auto x = g.coordinate(i);
          f[i] += A * std::cos(a * x[0] + b * x[1] + c * x[2] + p);
        }
      }
  return f;
}

inline emrelax::VectorField random_vector(const emrelax::PeriodicGrid& g, int comps, int kmax, std::mt19937_64& rng,
                                          double scale = 1.0) {
  std::vector<emrelax::ScalarField> c;
  for (int i = 0; i < comps; ++i) c.push_back(random_band_limited(g, kmax, rng, scale));
  return emrelax::VectorField(std::move(c));
}

inline double max_diff(const emrelax::ScalarField& a, const emrelax::ScalarField& b) { return (a - b).max_abs(); }

inline double max_diff(const emrelax::VectorField& a, const emrelax::VectorField& b) { return (a - b).max_abs(); }

}  // namespace testutil
