#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emrelax/doping.hpp"
#include "emrelax/equilibrium.hpp"
#include "emrelax/grid.hpp"
#include "emrelax/pressure_law.hpp"
#include "emrelax/relaxation.hpp"

namespace emrelax {

enum class SystemKind { EulerPoisson, EulerMaxwell, DriftDiffusion, EquilibriumOnly, StructureAudit };

std::string to_string(SystemKind k);
std::string to_string(VelocityInit v);

struct GridSpec {
  int dim = 1;
  int points = 128;
  double length = 2.0 * std::numbers::pi;

  PeriodicGrid make() const { return PeriodicGrid(dim, points, length); }
};

/// n_bar0 = n_e + amplitude * p / max|p|, p = sum of the listed cosines.
struct PerturbationSpec {
  double amplitude = 1e-2;
  std::vector<CosineMode> modes{CosineMode{{2, 0, 0}, 1.0, 0.0}};
  bool random_weights = false;  ///< draw mode weights uniformly in [-1, 1] from the seed
};

struct ExperimentConfig {
  SystemKind system = SystemKind::EulerPoisson;
  GridSpec grid{};
  double K = 1.0;
  double gamma = 1.0;
  double doping_base = 1.0;
  std::vector<CosineMode> doping_modes{CosineMode{{1, 0, 0}, 0.1, 0.0}};
  std::array<double, 3> B_e{0.0, 0.0, 0.0};
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05};
  PerturbationSpec perturbation{};
  VelocityInit velocity_init = VelocityInit::Zero;
  double t_end = 1.0;
  std::optional<double> dt;    ///< upper bound on the step; the stable step is used when absent
  double dt_safety = 0.9;      ///< fraction of the stable step
  int sobolev_order = 2;       ///< s - 1 in the error functionals
  double constraint_tol = 1e-8;
  double equilibrium_tol = 1e-10;
  int equilibrium_max_iter = 50;
  int snapshot_count = 50;     ///< minimum snapshots per run when snapshots are written
  bool write_snapshots = true;
  std::uint64_t seed = 1;
  int workers = 1;
  int bench_repetitions = 3;
  int bench_steps = 100;
  std::vector<double> structure_gammas{1.0, 1.4, 2.0, 3.0};

  PressureLaw law() const { return PressureLaw(K, gamma); }
  DopingProfile doping() const { return DopingProfile(doping_base, doping_modes); }
  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// Shared initial data for a sweep.
struct SweepSetup {
  ModelContext ctx;
  EquilibriumState eq;
  ScalarField nbar0;
};

SweepSetup prepare_setup(const ExperimentConfig& cfg);

/// Errors between relaxation and limit solutions at one instant.
struct ErrorFields {
  ScalarField N;                ///< n - n_bar
  VectorField U;                ///< u - u_bar
  VectorField F;                ///< E - E_bar
  std::optional<VectorField> G; ///< B - B_bar, Euler-Maxwell only
};

/// Streaming sup/trapezoid accumulation of the error functionals for every
/// order 0..s_max, so D_T resolves the initial layer at the step size.
class ErrorAccumulator {
 public:
  ErrorAccumulator(double epsilon, int s_max);

  void add(double t, const ErrorFields& e);

  int s_max() const noexcept { return s_max_; }
  /// E_T and D_T for the order s (0 <= s <= s_max).
  double E_T(int s) const { return E_[static_cast<std::size_t>(s)]; }
  double D_T(int s) const { return D_[static_cast<std::size_t>(s)]; }
  /// Time integral of ||curl G||^2 in H^{max(s-1,0)}.
  double curl_G_integral(int s) const { return curlG_[static_cast<std::size_t>(s)]; }
  double sup_N() const noexcept { return sup_[0]; }
  double sup_U() const noexcept { return sup_[1]; }
  double sup_F() const noexcept { return sup_[2]; }
  double sup_G() const noexcept { return sup_[3]; }
  std::size_t samples() const noexcept { return samples_; }

 private:
  double epsilon_;
  int s_max_;
  std::vector<double> E_, D_, curlG_;
  std::vector<double> prev_d_, prev_c_;
  std::array<double, 4> sup_{0.0, 0.0, 0.0, 0.0};
  double prev_t_ = 0.0;
  std::size_t samples_ = 0;
};

/// One time sample of a stored trajectory.
struct TrajectorySample {
  double t;
  ScalarField n;
  VectorField u;
  VectorField E;
  std::optional<VectorField> B;
};

using Trajectory = std::vector<TrajectorySample>;

struct ErrorFunctionals {
  double E_T;
  double D_T;
};

/// E_T = max ||(N, eps U, F, G)||^2_{s}, D_T = trapezoid of ||(N, U, F)||^2_{s} + ||curl G||^2_{max(s-1,0)}
/// with s = sobolev_order (the s-1 of the estimates). The limit trajectory is
/// interpolated linearly in time at the relaxation sample times; G = B - B_bar.
ErrorFunctionals error_functionals(const Trajectory& relax, const Trajectory& limit, double epsilon,
                                   int sobolev_order, const std::array<double, 3>& B_bar = {0.0, 0.0, 0.0});

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t rows = 0;
};

/// Least squares of log(error) on log(epsilon) with a percentile bootstrap
/// interval over row resampling. Throws DegenerateFit.
RateFit fit_rate(const std::vector<double>& epsilons, const std::vector<double>& errors, std::uint64_t seed = 1,
                 int resamples = 2000);

struct SweepRow {
  double epsilon = 0.0;
  double dt = 0.0;
  long steps = 0;
  std::vector<double> E_T;  ///< per order 0..s
  std::vector<double> D_T;
  std::vector<double> curl_G;
  double sup_N = 0.0, sup_U = 0.0, sup_F = 0.0, sup_G = 0.0;
  double drift_E = 0.0;  ///< max Gauss residual (Euler-Maxwell) or relative mass drift (Euler-Poisson)
  double drift_B = 0.0;  ///< max ||div B|| (3-D Euler-Maxwell)
  double mass_drift = 0.0;
  double bound_ratio = 0.0;  ///< sup ||(n-n_e, eps u, E-E_e, B-B_e)||_{s+1} over its initial value
  double wall_s = 0.0;
  long snapshot_stride = 0;
  int snapshots = 0;
  bool valid = true;
  std::string status = "ok";
};

struct SweepReport {
  ExperimentConfig config;
  std::vector<SweepRow> rows;
  /// Fits keyed by quantity name (E_T, D_T, E_T_s0, ..., curl_G); absent when degenerate.
  std::vector<std::pair<std::string, std::optional<RateFit>>> fits;
  std::string fit_note;
  bool monotone_E = true;
  bool monotone_D = true;
  double max_bound_ratio = 0.0;
  bool failed = false;  ///< some row aborted

  std::optional<RateFit> fit(const std::string& name) const;
};

/// Runs one epsilon; snapshots go to snapshot_dir when given.
SweepRow run_single(const ExperimentConfig& cfg, const SweepSetup& setup, double epsilon, double dt,
                    const std::optional<std::filesystem::path>& snapshot_dir);

/// Largest common step for all epsilons of the sweep (divides t_end).
double sweep_dt(const ExperimentConfig& cfg, const SweepSetup& setup, long* steps = nullptr);

SweepReport run_sweep(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& out_dir = {});

struct BenchRow {
  std::string system;
  double epsilon = 0.0;
  double dt = 0.0;
  int steps = 0;
  int repetitions = 0;
  double median_step_s = 0.0;
  double median_unit_time_s = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double em_spread = 0.0;  ///< max/min - 1 of the relaxation per-step cost across epsilon
};

BenchReport benchmark(const ExperimentConfig& cfg);

struct StructureReportRow {
  double gamma;
  std::string check;
  double value;
  double threshold;
  bool passed;
};

struct StructureReport {
  std::vector<StructureReportRow> rows;
  bool passed = true;
};

/// Audits the symmetrizer and anti-symmetry identities at the equilibrium for
/// every configured gamma, plus the linear growth of the defect off equilibrium
/// and the quadratic Taylor remainder.
StructureReport structure_report(const ExperimentConfig& cfg);

struct EquilibriumReport {
  EquilibriumState state;
  EquilibriumResiduals residuals;
  double mass_defect;  ///< |int n_e - int b| / int b
};

EquilibriumReport equilibrium_report(const ExperimentConfig& cfg);

// Writers
void write_sweep_outputs(const SweepReport& r, const std::filesystem::path& dir);
void write_bench_outputs(const BenchReport& r, const std::filesystem::path& dir);
void write_structure_outputs(const StructureReport& r, const std::filesystem::path& dir);
void write_equilibrium_outputs(const EquilibriumReport& r, const ExperimentConfig& cfg,
                               const std::filesystem::path& dir);

/// The fixed CSV header of report.csv for sweeps.
inline constexpr const char* kSweepCsvHeader = "epsilon,E_T,D_T,sup_N,sup_U,sup_F,sup_G,drift_E,drift_B,wall_s";

}  // namespace emrelax
