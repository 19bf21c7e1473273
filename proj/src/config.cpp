#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "emrelax/errors.hpp"
#include "emrelax/experiments.hpp"
#include "json.hpp"

namespace emrelax {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (allowed.count(key) == 0) fail(ErrorKind::InvalidArgument, "unknown key '" + key + "' in " + where);
}

std::vector<CosineMode> parse_modes(const json& arr, const std::string& where) {
  require(arr.is_array(), where + " must be an array");
  std::vector<CosineMode> out;
  for (const auto& m : arr) {
    reject_unknown(m, {"k", "amplitude", "phase"}, where);
    CosineMode cm;
    const auto k = m.at("k").get<std::vector<int>>();
    require(!k.empty() && k.size() <= 3, where + ": k needs 1 to 3 entries");
    cm.wavevector = {0, 0, 0};
    for (std::size_t i = 0; i < k.size(); ++i) cm.wavevector[i] = k[i];
    cm.amplitude = m.at("amplitude").get<double>();
    cm.phase = m.value("phase", 0.0);
    out.push_back(cm);
  }
  return out;
}

json modes_to_json(const std::vector<CosineMode>& modes) {
  json arr = json::array();
  for (const auto& m : modes)
    arr.push_back({{"k", {m.wavevector[0], m.wavevector[1], m.wavevector[2]}},
                   {"amplitude", m.amplitude},
                   {"phase", m.phase}});
  return arr;
}

SystemKind parse_system(const std::string& s) {
  if (s == "euler_poisson") return SystemKind::EulerPoisson;
  if (s == "euler_maxwell") return SystemKind::EulerMaxwell;
  if (s == "drift_diffusion") return SystemKind::DriftDiffusion;
  if (s == "equilibrium_only") return SystemKind::EquilibriumOnly;
  if (s == "structure_audit") return SystemKind::StructureAudit;
  fail(ErrorKind::InvalidArgument, "unknown system '" + s + "'");
}

VelocityInit parse_velocity(const std::string& s) {
  if (s == "zero") return VelocityInit::Zero;
  if (s == "limit") return VelocityInit::Limit;
  if (s == "raw") return VelocityInit::Raw;
  fail(ErrorKind::InvalidArgument, "unknown velocity_init '" + s + "'");
}

}  // namespace

std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::EulerPoisson: return "euler_poisson";
    case SystemKind::EulerMaxwell: return "euler_maxwell";
    case SystemKind::DriftDiffusion: return "drift_diffusion";
    case SystemKind::EquilibriumOnly: return "equilibrium_only";
    case SystemKind::StructureAudit: return "structure_audit";
  }
  return "unknown";
}

std::string to_string(VelocityInit v) {
  switch (v) {
    case VelocityInit::Zero: return "zero";
    case VelocityInit::Limit: return "limit";
    case VelocityInit::Raw: return "raw";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  (void)grid.make();
  (void)law();
  (void)doping();
  require(!epsilons.empty(), "epsilons must not be empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    require(epsilons[i] > 0.0 && epsilons[i] <= 1.0, "every epsilon must lie in (0, 1]");
    if (i > 0) require(epsilons[i] < epsilons[i - 1], "epsilons must be strictly decreasing");
  }
  require(perturbation.amplitude >= 0.0, "perturbation amplitude must be non-negative");
  require(perturbation.amplitude <= 0.1 * doping_base, "perturbation amplitude must not exceed 0.1 * doping base");
  require(t_end > 0.0, "t_end must be positive");
  require(!dt || *dt > 0.0, "dt must be positive");
  require(dt_safety > 0.0 && dt_safety <= 1.0, "dt safety must lie in (0, 1]");
  require(sobolev_order >= 0, "sobolev_order must be non-negative");
  require(4 * (sobolev_order + 1) <= grid.points, "sobolev_order + 1 must not exceed points/4");
  require(constraint_tol > 0.0, "constraint_tol must be positive");
  require(equilibrium_tol > 0.0 && equilibrium_max_iter > 0, "bad equilibrium solver settings");
  require(snapshot_count >= 1, "snapshot count must be positive");
  require(workers >= 1, "workers must be at least 1");
  require(bench_repetitions >= 3, "benchmarks need at least 3 repetitions");
  require(bench_steps >= 1, "bench steps must be positive");
  if (system == SystemKind::EulerMaxwell) require(grid.dim >= 2, "euler_maxwell needs dim 2 or 3");
  for (const auto& m : doping_modes)
    for (int d = grid.dim; d < 3; ++d)
      require(m.wavevector[static_cast<std::size_t>(d)] == 0, "doping wavevector has components beyond dim");
  for (const auto& m : perturbation.modes)
    for (int d = grid.dim; d < 3; ++d)
      require(m.wavevector[static_cast<std::size_t>(d)] == 0, "perturbation wavevector has components beyond dim");
  for (double g : structure_gammas) require(g >= 1.0, "structure gammas must be >= 1");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config must be a JSON object");
  reject_unknown(j,
                 {"system", "grid", "law", "doping", "B_e", "epsilons", "perturbation", "velocity_init", "time",
                  "sobolev_order", "constraint_tol", "equilibrium", "snapshots", "seed", "workers", "bench",
                  "structure"},
                 "config");

  ExperimentConfig c;
  try {
    if (j.contains("system")) c.system = parse_system(j["system"].get<std::string>());
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      reject_unknown(g, {"dim", "points", "length"}, "grid");
      c.grid.dim = g.value("dim", c.grid.dim);
      c.grid.points = g.value("points", c.grid.points);
      c.grid.length = g.value("length", c.grid.length);
    }
    if (j.contains("law")) {
      const auto& l = j["law"];
      reject_unknown(l, {"K", "gamma"}, "law");
      c.K = l.value("K", c.K);
      c.gamma = l.value("gamma", c.gamma);
    }
    if (j.contains("doping")) {
      const auto& d = j["doping"];
      reject_unknown(d, {"base", "modes"}, "doping");
      c.doping_base = d.value("base", c.doping_base);
      if (d.contains("modes")) c.doping_modes = parse_modes(d["modes"], "doping.modes");
    }
    if (j.contains("B_e")) {
      const auto v = j["B_e"].get<std::vector<double>>();
      require(v.size() == 3, "B_e needs 3 entries");
      c.B_e = {v[0], v[1], v[2]};
    }
    if (j.contains("epsilons")) c.epsilons = j["epsilons"].get<std::vector<double>>();
    if (j.contains("perturbation")) {
      const auto& p = j["perturbation"];
      reject_unknown(p, {"amplitude", "modes", "random_weights"}, "perturbation");
      c.perturbation.amplitude = p.value("amplitude", c.perturbation.amplitude);
      if (p.contains("modes")) c.perturbation.modes = parse_modes(p["modes"], "perturbation.modes");
      c.perturbation.random_weights = p.value("random_weights", false);
    }
    if (j.contains("velocity_init")) c.velocity_init = parse_velocity(j["velocity_init"].get<std::string>());
    if (j.contains("time")) {
      const auto& t = j["time"];
      reject_unknown(t, {"t_end", "dt", "safety"}, "time");
      c.t_end = t.value("t_end", c.t_end);
      if (t.contains("dt") && !t["dt"].is_null()) c.dt = t["dt"].get<double>();
      c.dt_safety = t.value("safety", c.dt_safety);
    }
    c.sobolev_order = j.value("sobolev_order", c.sobolev_order);
    c.constraint_tol = j.value("constraint_tol", c.constraint_tol);
    if (j.contains("equilibrium")) {
      const auto& e = j["equilibrium"];
      reject_unknown(e, {"tol", "max_iter"}, "equilibrium");
      c.equilibrium_tol = e.value("tol", c.equilibrium_tol);
      c.equilibrium_max_iter = e.value("max_iter", c.equilibrium_max_iter);
    }
    if (j.contains("snapshots")) {
      const auto& s = j["snapshots"];
      reject_unknown(s, {"enabled", "count"}, "snapshots");
      c.write_snapshots = s.value("enabled", c.write_snapshots);
      c.snapshot_count = s.value("count", c.snapshot_count);
    }
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    if (j.contains("bench")) {
      const auto& b = j["bench"];
      reject_unknown(b, {"repetitions", "steps"}, "bench");
      c.bench_repetitions = b.value("repetitions", c.bench_repetitions);
      c.bench_steps = b.value("steps", c.bench_steps);
    }
    if (j.contains("structure")) {
      const auto& s = j["structure"];
      reject_unknown(s, {"gammas"}, "structure");
      if (s.contains("gammas")) c.structure_gammas = s["gammas"].get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("config has a wrongly typed value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["system"] = to_string(c.system);
  j["grid"] = {{"dim", c.grid.dim}, {"points", c.grid.points}, {"length", c.grid.length}};
  j["law"] = {{"K", c.K}, {"gamma", c.gamma}};
  j["doping"] = {{"base", c.doping_base}, {"modes", modes_to_json(c.doping_modes)}};
  j["B_e"] = {c.B_e[0], c.B_e[1], c.B_e[2]};
  j["epsilons"] = c.epsilons;
  j["perturbation"] = {{"amplitude", c.perturbation.amplitude},
                       {"modes", modes_to_json(c.perturbation.modes)},
                       {"random_weights", c.perturbation.random_weights}};
  j["velocity_init"] = to_string(c.velocity_init);
  j["time"] = {{"t_end", c.t_end}, {"dt", c.dt ? json(*c.dt) : json(nullptr)}, {"safety", c.dt_safety}};
  j["sobolev_order"] = c.sobolev_order;
  j["constraint_tol"] = c.constraint_tol;
  j["equilibrium"] = {{"tol", c.equilibrium_tol}, {"max_iter", c.equilibrium_max_iter}};
  j["snapshots"] = {{"enabled", c.write_snapshots}, {"count", c.snapshot_count}};
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["bench"] = {{"repetitions", c.bench_repetitions}, {"steps", c.bench_steps}};
  j["structure"] = {{"gammas", c.structure_gammas}};
  return j.dump(2);
}

}  // namespace emrelax
