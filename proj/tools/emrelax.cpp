// Command-line driver: equilibrium, sweep, structure and bench subcommands.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "emrelax/errors.hpp"
#include "emrelax/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

emrelax::ExperimentConfig load(const Options& o, emrelax::SystemKind fallback) {
  emrelax::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = emrelax::load_config(o.config);
  } else {
    cfg.system = fallback;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

int cmd_equilibrium(const Options& o) {
  const auto cfg = load(o, emrelax::SystemKind::EquilibriumOnly);
  const auto rep = emrelax::equilibrium_report(cfg);
  emrelax::write_equilibrium_outputs(rep, cfg, o.out);
  const double rel = rep.residuals.max_relative();
  std::printf("equilibrium: %d Newton iterations, max relative residual %.3e, n_e in [%.6f, %.6f]\n",
              rep.state.newton_iterations, rel, rep.state.n_e.min(), rep.state.n_e.max());
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto cfg = load(o, emrelax::SystemKind::EulerPoisson);
  const auto rep = emrelax::run_sweep(cfg, std::filesystem::path(o.out));
  for (const auto& r : rep.rows) {
    const std::size_t top = static_cast<std::size_t>(cfg.sobolev_order);
    std::printf("eps %-8g E_T %.4e D_T %.4e  bound %.3f  %s\n", r.epsilon, r.E_T.empty() ? 0.0 : r.E_T[top],
                r.D_T.empty() ? 0.0 : r.D_T[top], r.bound_ratio, r.status.c_str());
  }
  for (const char* name : {"E_T", "D_T", "curl_G"}) {
    if (const auto f = rep.fit(name)) std::printf("%-7s slope %.4f  95%% CI [%.4f, %.4f]\n", name, f->slope, f->ci_low, f->ci_high);
  }
  if (!rep.fit_note.empty()) std::printf("note: %s\n", rep.fit_note.c_str());
  return rep.failed ? 1 : 0;
}

int cmd_structure(const Options& o) {
  const auto cfg = load(o, emrelax::SystemKind::StructureAudit);
  const auto rep = emrelax::structure_report(cfg);
  emrelax::write_structure_outputs(rep, o.out);
  for (const auto& c : rep.rows)
    std::printf("gamma %-4g %-28s %.3e (threshold %.3e) %s\n", c.gamma, c.check.c_str(), c.value, c.threshold,
                c.passed ? "pass" : "FAIL");
  return rep.passed ? 0 : 1;
}

int cmd_bench(const Options& o) {
  const auto cfg = load(o, emrelax::SystemKind::EulerPoisson);
  const auto rep = emrelax::benchmark(cfg);
  emrelax::write_bench_outputs(rep, o.out);
  for (const auto& b : rep.rows)
    std::printf("%-16s eps %-8g %.3e s/step  %.3e s per unit time\n", b.system.c_str(), b.epsilon, b.median_step_s,
                b.median_unit_time_s);
  std::printf("relaxation cost spread across epsilon: %.1f%%\n", 100.0 * rep.em_spread);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxation-limit experiments for Euler-Maxwell and Euler-Poisson models"};
  app.require_subcommand(1);
  Options opts;

  const auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory")->capture_default_str();
    sub->add_option("--seed", opts.seed, "random seed (overrides the config)");
    sub->add_option("--workers", opts.workers, "concurrent sweep workers (overrides the config)")
        ->check(CLI::PositiveNumber);
  };

  auto* eq = app.add_subcommand("equilibrium", "solve the stationary problem and report residuals");
  auto* sweep = app.add_subcommand("sweep", "epsilon sweep against the drift-diffusion limit");
  auto* structure = app.add_subcommand("structure", "symmetrizer and anti-symmetry audit");
  auto* bench = app.add_subcommand("bench", "per-step timings across epsilon");
  for (auto* s : {eq, sweep, structure, bench}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eq) return cmd_equilibrium(opts);
    if (*sweep) return cmd_sweep(opts);
    if (*structure) return cmd_structure(opts);
    if (*bench) return cmd_bench(opts);
  } catch (const emrelax::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
