#include "emrelax/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "emrelax/errors.hpp"

namespace emrelax {
namespace {

struct FftPlans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  std::size_t spectral_size = 0;
  std::vector<Mode> modes;
};

std::size_t half_size(const PeriodicGrid& g) {
  std::size_t s = static_cast<std::size_t>(g.points_per_dim() / 2 + 1);
  for (int d = 0; d < g.dim() - 1; ++d) s *= static_cast<std::size_t>(g.points_per_dim());
  return s;
}

std::vector<Mode> build_modes(const PeriodicGrid& g) {
  const int n = g.points_per_dim();
  const int dim = g.dim();
  const int half = n / 2 + 1;
  const double scale = g.wavenumber_scale();
  std::vector<Mode> table(half_size(g));

  std::array<int, 3> extent{1, 1, 1};
  for (int d = 0; d < dim - 1; ++d) extent[static_cast<std::size_t>(d)] = n;
  extent[static_cast<std::size_t>(dim - 1)] = half;

  std::size_t flat = 0;
  for (int i0 = 0; i0 < extent[0]; ++i0)
    for (int i1 = 0; i1 < extent[1]; ++i1)
      for (int i2 = 0; i2 < extent[2]; ++i2, ++flat) {
        const std::array<int, 3> raw{i0, i1, i2};
        Mode m{};
        m.index = flat;
        m.kappa_sq = 0.0;
        for (int d = 0; d < 3; ++d) {
          const auto du = static_cast<std::size_t>(d);
          int k = 0;
          if (d < dim) {
            const int i = raw[du];
            k = (d == dim - 1) ? i : (i <= n / 2 ? i : i - n);
          }
          m.k[du] = k;
          m.kappa[du] = scale * k;
          m.kd[du] = (std::abs(k) == n / 2) ? 0.0 : scale * k;
          m.kappa_sq += m.kappa[du] * m.kappa[du];
        }
        const int last = raw[static_cast<std::size_t>(dim - 1)];
        m.weight = (last == 0 || last == n / 2) ? 1.0 : 2.0;
        table[flat] = m;
      }
  return table;
}

std::shared_ptr<const FftPlans> plans_for(const PeriodicGrid& g) {
  using Key = std::tuple<int, int, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<FftPlans>> cache;

  const Key key{g.dim(), g.points_per_dim(), g.domain_length()};
  std::lock_guard lock(mutex);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  auto plans = std::make_shared<FftPlans>();
  plans->spectral_size = half_size(g);
  plans->modes = build_modes(g);

  std::array<int, 3> dims{g.points_per_dim(), g.points_per_dim(), g.points_per_dim()};
  auto* real = fftw_alloc_real(g.size());
  auto* cplx = fftw_alloc_complex(plans->spectral_size);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans->r2c = fftw_plan_dft_r2c(g.dim(), dims.data(), real, cplx, flags);
  plans->c2r = fftw_plan_dft_c2r(g.dim(), dims.data(), cplx, real, flags);
  fftw_free(real);
  fftw_free(cplx);
  if (plans->r2c == nullptr || plans->c2r == nullptr) fail(ErrorKind::InvalidArgument, "FFTW planning failed");

  cache.emplace(key, plans);
  return plans;
}

}  // namespace

Spectrum::Spectrum(const PeriodicGrid& grid) : grid_(grid), coeffs_(half_size(grid)) {}

const std::vector<Mode>& modes(const PeriodicGrid& grid) { return plans_for(grid)->modes; }

Spectrum forward(const ScalarField& f) {
  const auto plans = plans_for(f.grid());
  Spectrum out(f.grid());
  // r2c does not modify its input for out-of-place transforms.
  fftw_execute_dft_r2c(plans->r2c, const_cast<double*>(f.data()),
                       reinterpret_cast<fftw_complex*>(out.coeffs().data()));
  return out;
}

ScalarField inverse(const Spectrum& s) {
  const auto plans = plans_for(s.grid());
  std::vector<Complex> scratch = s.coeffs();  // c2r destroys its input
  ScalarField out(s.grid());
  fftw_execute_dft_c2r(plans->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  out *= 1.0 / static_cast<double>(s.grid().size());
  return out;
}

ScalarField apply_multiplier(const ScalarField& f, const std::function<double(const Mode&)>& symbol) {
  Spectrum s = forward(f);
  for (const Mode& m : modes(f.grid())) s[m.index] *= symbol(m);
  return inverse(s);
}

ScalarField partial(const ScalarField& f, int axis) {
  require(axis >= 0 && axis < f.grid().dim(), "partial: axis out of range");
  Spectrum s = forward(f);
  const auto a = static_cast<std::size_t>(axis);
  for (const Mode& m : modes(f.grid())) s[m.index] *= Complex(0.0, m.kd[a]);
  return inverse(s);
}

VectorField gradient(const ScalarField& f) {
  const Spectrum s = forward(f);
  const auto& table = modes(f.grid());
  std::vector<ScalarField> comps;
  for (int d = 0; d < f.grid().dim(); ++d) {
    Spectrum ds(f.grid());
    const auto a = static_cast<std::size_t>(d);
    for (const Mode& m : table) ds[m.index] = s[m.index] * Complex(0.0, m.kd[a]);
    comps.push_back(inverse(ds));
  }
  return VectorField(std::move(comps));
}

ScalarField divergence(const VectorField& v) {
  const auto& g = v.grid();
  require(v.components() == g.dim(), "divergence needs dim components");
  const auto& table = modes(g);
  Spectrum acc(g);
  for (int d = 0; d < g.dim(); ++d) {
    const Spectrum s = forward(v[d]);
    const auto a = static_cast<std::size_t>(d);
    for (const Mode& m : table) acc[m.index] += s[m.index] * Complex(0.0, m.kd[a]);
  }
  return inverse(acc);
}

ScalarField laplacian(const ScalarField& f) {
  return apply_multiplier(f, [](const Mode& m) { return -m.kappa_sq; });
}

VectorField laplacian(const VectorField& v) {
  std::vector<ScalarField> comps;
  for (const auto& c : v) comps.push_back(laplacian(c));
  return VectorField(std::move(comps));
}

VectorField curl(const VectorField& v) {
  const auto& g = v.grid();
  if (g.dim() == 3) {
    require(v.components() == 3, "curl in 3-D needs 3 components");
    // (d2 v3 - d3 v2, d3 v1 - d1 v3, d1 v2 - d2 v1); axis j stores x_{j+1}
    std::vector<ScalarField> out;
    out.push_back(partial(v[2], 1) - partial(v[1], 2));
    out.push_back(partial(v[0], 2) - partial(v[2], 0));
    out.push_back(partial(v[1], 0) - partial(v[0], 1));
    return VectorField(std::move(out));
  }
  if (g.dim() == 2) {
    if (v.components() == 2) {
      std::vector<ScalarField> out;
      out.push_back(partial(v[1], 0) - partial(v[0], 1));
      return VectorField(std::move(out));
    }
    require(v.components() == 1, "curl in 2-D needs 1 or 2 components");
    std::vector<ScalarField> out;
    out.push_back(partial(v[0], 1));
    out.push_back(-partial(v[0], 0));
    return VectorField(std::move(out));
  }
  fail(ErrorKind::InvalidArgument, "curl is undefined in one dimension");
}

ScalarField poisson_solve(const ScalarField& rhs) {
  const double mean = rhs.mean();
  const double scale = rhs.max_abs();
  if (std::abs(mean) > 1e-10 * scale + 1e-15)
    fail(ErrorKind::NonZeroMeanRhs, "Poisson source has mean " + std::to_string(mean) + " (max " +
                                        std::to_string(scale) + ")");
  return apply_multiplier(rhs, [](const Mode& m) { return m.kappa_sq == 0.0 ? 0.0 : -1.0 / m.kappa_sq; });
}

VectorField poisson_solve(const VectorField& rhs) {
  std::vector<ScalarField> comps;
  for (const auto& c : rhs) comps.push_back(poisson_solve(c));
  return VectorField(std::move(comps));
}

ScalarField dealias(const ScalarField& f) {
  const int n = f.grid().points_per_dim();
  return apply_multiplier(f, [n](const Mode& m) {
    for (int k : m.k)
      if (3 * std::abs(k) > n) return 0.0;
    return 1.0;
  });
}

VectorField dealias(const VectorField& v) {
  std::vector<ScalarField> comps;
  for (const auto& c : v) comps.push_back(dealias(c));
  return VectorField(std::move(comps));
}

ScalarField dealiased_product(const ScalarField& a, const ScalarField& b) { return dealias(a * b); }

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s * f.grid().cell_volume());
}

double l2_norm(const VectorField& v) {
  double s = 0.0;
  for (const auto& c : v) {
    const double n = l2_norm(c);
    s += n * n;
  }
  return std::sqrt(s);
}

double sobolev_weight(const Mode& mode, int s) {
  // h[m] accumulates the complete homogeneous polynomial of degree m in
  // (kappa_1^2, ..., kappa_d^2); the H^s symbol is sum_{m<=s} h[m].
  std::vector<double> h(static_cast<std::size_t>(s) + 1, 0.0);
  h[0] = 1.0;
  for (double kap : mode.kappa) {
    const double x = kap * kap;
    if (x == 0.0) continue;
    for (int m = 1; m <= s; ++m) h[static_cast<std::size_t>(m)] += x * h[static_cast<std::size_t>(m - 1)];
  }
  double w = 0.0;
  for (double v : h) w += v;
  return w;
}

double sobolev_norm_squared(const ScalarField& f, SobolevOrder order) {
  const auto& g = f.grid();
  require(order.s >= 0, "Sobolev order must be non-negative");
  require(4 * order.s <= g.points_per_dim(), "Sobolev order exceeds points_per_dim/4");
  const Spectrum sp = forward(f);
  const double n_total = static_cast<double>(g.size());
  double acc = 0.0;
  for (const Mode& m : modes(g)) acc += m.weight * std::norm(sp[m.index]) * sobolev_weight(m, order.s);
  // ||f||^2 = V * sum_k |f_k / N|^2
  return acc * g.volume() / (n_total * n_total);
}

double sobolev_norm_squared(const VectorField& v, SobolevOrder order) {
  double s = 0.0;
  for (const auto& c : v) s += sobolev_norm_squared(c, order);
  return s;
}

std::vector<double> sobolev_profile(const ScalarField& f, int s_max) {
  const auto& g = f.grid();
  require(s_max >= 0 && 4 * s_max <= g.points_per_dim(), "Sobolev order out of range");
  const Spectrum sp = forward(f);
  const double n_total = static_cast<double>(g.size());
  const double scale = g.volume() / (n_total * n_total);
  std::vector<double> acc(static_cast<std::size_t>(s_max) + 1, 0.0);
  for (const Mode& m : modes(g)) {
    const double a = m.weight * std::norm(sp[m.index]);
    if (a == 0.0) continue;
    for (int s = 0; s <= s_max; ++s) acc[static_cast<std::size_t>(s)] += a * sobolev_weight(m, s);
  }
  for (double& v : acc) v *= scale;
  return acc;
}

std::vector<double> sobolev_profile(const VectorField& v, int s_max) {
  std::vector<double> acc(static_cast<std::size_t>(s_max) + 1, 0.0);
  for (const auto& c : v) {
    const auto p = sobolev_profile(c, s_max);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  }
  return acc;
}

double sobolev_norm(const ScalarField& f, SobolevOrder order) { return std::sqrt(sobolev_norm_squared(f, order)); }
double sobolev_norm(const VectorField& v, SobolevOrder order) { return std::sqrt(sobolev_norm_squared(v, order)); }

}  // namespace emrelax
