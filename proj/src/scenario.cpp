#include "chaosnet/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "chaosnet/errors.hpp"
#include "chaosnet/parallel.hpp"
#include "chaosnet/rng.hpp"
#include "chaosnet/securecomm.hpp"

namespace chaosnet {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---- config parsing ---------------------------------------------------

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError("config: " + msg); }

const ordered_json& need(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(std::string("missing field '") + key + "'");
  return *it;
}

double need_number(const ordered_json& j, const char* key) {
  const auto& v = need(j, key);
  if (!v.is_number()) config_fail(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

double opt_number(const ordered_json& j, const char* key, double fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) config_fail(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

bool opt_bool(const ordered_json& j, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) config_fail(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

std::string opt_string(const ordered_json& j, const char* key, const std::string& fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) config_fail(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Matrix parse_adjacency(const ordered_json& rows, int n) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    config_fail("adjacency must be an NxN array of arrays");
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      config_fail("adjacency row " + std::to_string(i) + " must hold N numbers");
    for (int j = 0; j < n; ++j) a(i, j) = row[j].get<double>();
  }
  return a;
}

DirectedGraph parse_topology(const ordered_json& topo, int agents) {
  std::string kind = opt_string(topo, "kind", "chain");
  std::replace(kind.begin(), kind.end(), '-', '_');
  try {
    if (kind == "chain") return chain_topology(agents);
    if (kind == "rossler_loop") {
      if (agents != 5) config_fail("rossler_loop topology requires exactly 5 agents");
      return loop_topology_rossler();
    }
    if (kind == "adjacency") return make_graph(agents, parse_adjacency(need(topo, "rows"), agents));
  } catch (const InvalidArgument& e) {
    config_fail(e.what());
  }
  config_fail("unknown topology kind '" + kind + "' (chain, rossler_loop, adjacency)");
}

std::vector<double> parse_vector(const ordered_json& v, int dim, const char* what) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    config_fail(std::string(what) + " must be an array of " + std::to_string(dim) + " numbers");
  std::vector<double> out(dim);
  for (int k = 0; k < dim; ++k) out[k] = v[k].get<double>();
  return out;
}

DelayMode parse_delay_mode(const std::string& name) {
  if (name == "all_delayed") return DelayMode::all_delayed;
  if (name == "neighbor_only") return DelayMode::neighbor_only;
  if (name == "leader_literal") return DelayMode::leader_literal;
  config_fail("unknown delay_mode '" + name + "'");
}

}  // namespace

Scenario parse_scenario_text(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    config_fail(std::string("JSON parse error: ") + e.what());
  }

  Scenario s;
  s.name = opt_string(j, "name", "scenario");
  std::string system_name = need(j, "system").get<std::string>();
  try {
    s.system = builtin_system(system_name);
  } catch (const InvalidArgument& e) {
    config_fail(e.what());
  }

  int agents = static_cast<int>(opt_number(j, "agents", 5));
  if (agents < 2) config_fail("agents must be >= 2");
  s.graph = parse_topology(j.contains("topology") ? j["topology"] : ordered_json::object(), agents);

  s.seed = static_cast<uint64_t>(opt_number(j, "seed", 42));

  const auto& coupling = need(j, "coupling");
  s.coupling.alpha = need_number(coupling, "alpha");
  if (!(s.coupling.alpha > 0.0)) config_fail("coupling.alpha must be > 0");
  s.coupling.delay = opt_number(coupling, "delay", 0.0);
  if (s.coupling.delay < 0.0) config_fail("coupling.delay must be >= 0");
  s.coupling.noise_variance = opt_number(coupling, "noise_variance", 0.0);
  if (s.coupling.noise_variance < 0.0) config_fail("coupling.noise_variance must be >= 0");
  s.coupling.heterogeneity = opt_number(coupling, "heterogeneity", 0.0);
  if (s.coupling.heterogeneity < 0.0) config_fail("coupling.heterogeneity must be >= 0");
  if (s.coupling.heterogeneity > 0.0)
    s.coupling.hetero_directions =
        heterogeneity_directions(agents, s.system.dim, derive_seed(s.seed, 1));
  s.delay_mode = parse_delay_mode(opt_string(coupling, "delay_mode", "all_delayed"));

  const auto& integrator = need(j, "integrator");
  s.dt = need_number(integrator, "dt");
  s.horizon = need_number(integrator, "horizon");
  if (s.dt <= 0.0) config_fail("integrator.dt must be > 0");
  if (s.horizon <= 10.0 * s.dt) config_fail("integrator.horizon must exceed 10*dt");

  if (j.contains("initial")) {
    const auto& init = j["initial"];
    std::string kind = opt_string(init, "kind", "random_ball");
    std::replace(kind.begin(), kind.end(), '-', '_');
    if (kind == "explicit") {
      const auto& states = need(init, "states");
      if (!states.is_array() || static_cast<int>(states.size()) != agents)
        config_fail("initial.states must hold one vector per agent");
      s.initial.explicit_states = true;
      for (const auto& v : states)
        s.initial.states.push_back(parse_vector(v, s.system.dim, "initial state"));
    } else if (kind == "random_ball") {
      s.initial.leader = init.contains("leader")
                             ? parse_vector(init["leader"], s.system.dim, "initial.leader")
                             : std::vector<double>(s.system.dim, 1.0);
      s.initial.radius = opt_number(init, "radius", 0.5);
      if (s.initial.radius < 0.0) config_fail("initial.radius must be >= 0");
    } else {
      config_fail("unknown initial kind '" + kind + "'");
    }
  } else {
    s.initial.leader.assign(s.system.dim, 1.0);
  }

  if (j.contains("analysis")) {
    const auto& a = j["analysis"];
    s.analysis.certificates = opt_bool(a, "certificates", true);
    s.analysis.metrics = opt_bool(a, "metrics", true);
    s.analysis.securecomm = opt_bool(a, "securecomm", false);
    s.analysis.convergence_threshold = opt_number(a, "convergence_threshold", 1e-2);
    s.analysis.window_fraction = opt_number(a, "window_fraction", 0.1);
    if (s.analysis.convergence_threshold <= 0.0) config_fail("convergence_threshold must be > 0");
    if (s.analysis.window_fraction <= 0.0 || s.analysis.window_fraction > 0.5)
      config_fail("window_fraction must lie in (0, 0.5]");
  }

  if (j.contains("switching")) {
    const auto& sw = j["switching"];
    SwitchingRequest req;
    req.average_dwell = need_number(sw, "average_dwell");
    if (req.average_dwell <= 0.0) config_fail("switching.average_dwell must be > 0");
    const auto& graphs = need(sw, "graphs");
    if (!graphs.is_array() || graphs.empty()) config_fail("switching.graphs must be a nonempty array");
    for (const auto& gj : graphs) req.graphs.push_back(parse_topology(gj, agents));
    for (const auto& g : req.graphs)
      if (!has_spanning_tree_rooted_at_leader(g))
        config_fail("every switching graph needs a leader-rooted spanning tree");
    if (s.coupling.delay > 0.0 || s.coupling.noise_variance > 0.0)
      config_fail("switching scenarios support neither delay nor noise");
    s.switching = std::move(req);
  }

  if (j.contains("output")) {
    s.output_dir = opt_string(j["output"], "dir", "out");
    s.full_resolution = opt_bool(j["output"], "full_resolution", false);
  }

  s.raw = j.dump();
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string resolve_output_dir(const Scenario& scenario) {
  if (const char* env = std::getenv(kOutputDirEnvVar); env && *env)
    return std::string(env) + "/" + scenario.name;
  return scenario.output_dir;
}

// ---- output helpers ----------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) {
    file_ = std::fopen(path.string().c_str(), "w");
    if (!file_) throw NumericalError("cannot open output file " + path.string());
    std::fprintf(file_, "%s\n", header.c_str());
  }
  ~CsvWriter() {
    if (file_) std::fclose(file_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(std::span<const std::string> cells) {
    for (size_t k = 0; k < cells.size(); ++k)
      std::fprintf(file_, "%s%s", k ? "," : "", cells[k].c_str());
    std::fprintf(file_, "\n");
  }

 private:
  std::FILE* file_ = nullptr;
};

void write_trajectory_csv(const fs::path& path, const Trajectory& traj, bool full_resolution) {
  std::string header = "t,agent";
  for (int d = 1; d <= traj.dim; ++d) header += ",x" + std::to_string(d);
  CsvWriter csv(path, header);

  size_t total_rows = traj.samples() * static_cast<size_t>(traj.num_agents);
  size_t stride = 1;
  if (!full_resolution && total_rows > 100000)
    stride = (total_rows + 99999) / 100000;

  std::vector<std::string> cells;
  for (size_t k = 0; k < traj.samples(); k += stride) {
    for (int i = 0; i < traj.num_agents; ++i) {
      cells.clear();
      cells.push_back(format_double(traj.times[k]));
      cells.push_back(std::to_string(i + 1));  // agents are 1-based on disk; 1 is the leader
      auto s = traj.agent_state(k, i);
      for (double v : s) cells.push_back(format_double(v));
      csv.row(cells);
    }
  }
}

void write_error_csv(const fs::path& path, const Trajectory& traj,
                     const std::vector<double>& series) {
  CsvWriter csv(path, "t,E");
  std::vector<std::string> cells;
  for (size_t k = 0; k < series.size(); ++k) {
    cells.clear();
    cells.push_back(format_double(traj.times[k]));
    cells.push_back(format_double(series[k]));
    csv.row(cells);
  }
}

ordered_json metrics_to_json(const SyncMetrics& m) {
  ordered_json j;
  j["steady_state_error"] = m.steady_state_error;
  if (m.convergence_time)
    j["convergence_time"] = *m.convergence_time;
  else
    j["convergence_time"] = nullptr;
  j["final_error"] = m.error_series.empty() ? 0.0 : m.error_series.back();
  j["max_error"] = m.error_series.empty()
                       ? 0.0
                       : *std::max_element(m.error_series.begin(), m.error_series.end());
  j["offsets"] = m.offsets;
  j["offset_fluctuation"] = m.offset_fluctuation;
  j["diverged"] = m.diverged;
  if (m.diverged)
    j["divergence_time"] = m.divergence_time;
  else
    j["divergence_time"] = nullptr;
  return j;
}

ordered_json certificates_to_json(const CertificateReport& r) {
  ordered_json j;
  j["theorem2_margin"] = r.theorem2_margin;
  j["eq9_margin"] = r.eq9_margin;
  j["krasovskii_margin"] = r.krasovskii_margin;
  j["spectral_abscissa"] = r.spectral_abscissa;
  j["samples_used"] = r.samples_used;
  j["verdicts"] = {{"theorem2", r.theorem2_ok},
                   {"eq9", r.eq9_ok},
                   {"krasovskii", r.krasovskii_ok},
                   {"spectral", r.spectral_ok}};
  return j;
}

void write_summary(const fs::path& path, const ordered_json& summary) {
  std::ofstream out(path);
  out << summary.dump(2) << "\n";
}

NetworkState build_initial_state(const Scenario& s) {
  NetworkState x0(s.graph.num_agents, s.system.dim);
  if (s.initial.explicit_states) {
    for (int i = 0; i < s.graph.num_agents; ++i)
      std::copy(s.initial.states[i].begin(), s.initial.states[i].end(), x0.agent(i).begin());
    return x0;
  }
  Rng rng(derive_seed(s.seed, 2));
  for (int i = 0; i < s.graph.num_agents; ++i) {
    auto xi = x0.agent(i);
    for (int d = 0; d < s.system.dim; ++d) {
      xi[d] = s.initial.leader[d];
      if (i != DirectedGraph::leader) xi[d] += rng.uniform(-s.initial.radius, s.initial.radius);
    }
  }
  return x0;
}

std::string integration_mode(const Scenario& s) {
  if (s.switching) return "switched";
  if (s.coupling.delay > 0.0) return "dde";
  if (s.coupling.noise_variance > 0.0) return "sde";
  return "ode";
}

Trajectory integrate_scenario(const Scenario& s, const NetworkState& x0) {
  if (s.switching) {
    SwitchingSchedule sched = sample_switching_schedule(
        s.switching->graphs, s.switching->average_dwell, s.horizon, derive_seed(s.seed, 3));
    return integrate_switched(s.system, sched, s.coupling, x0, s.dt, s.horizon);
  }
  if (s.coupling.delay > 0.0)
    return integrate_dde(s.system, s.graph, s.coupling, x0, s.dt, s.horizon,
                         DdeOptions{s.delay_mode, false});
  if (s.coupling.noise_variance > 0.0)
    return integrate_sde(s.system, s.graph, s.coupling, x0, s.dt, s.horizon,
                         derive_seed(s.seed, 4));
  return integrate_ode(s.system, s.graph, s.coupling, x0, s.dt, s.horizon);
}

std::vector<double> leader_start(const Scenario& s) {
  if (s.initial.explicit_states) return s.initial.states[0];
  return s.initial.leader;
}

}  // namespace

RunResult run_scenario(const Scenario& scenario) {
  auto t0 = std::chrono::steady_clock::now();
  fs::path out_dir = resolve_output_dir(scenario);
  fs::create_directories(out_dir);

  NetworkState x0 = build_initial_state(scenario);

  auto t_int = std::chrono::steady_clock::now();
  Trajectory traj = integrate_scenario(scenario, x0);
  double integrate_seconds = elapsed_seconds(t_int);

  SyncMetrics metrics =
      compute_metrics(traj, scenario.analysis.convergence_threshold, scenario.analysis.window_fraction);

  ordered_json summary;
  summary["scenario"] = ordered_json::parse(scenario.raw);
  summary["mode"] = integration_mode(scenario);
  summary["status"] = traj.diverged ? "diverged" : "ok";
  if (scenario.analysis.metrics) summary["metrics"] = metrics_to_json(metrics);

  double certify_seconds = 0.0;
  if (scenario.analysis.certificates) {
    auto t_cert = std::chrono::steady_clock::now();
    CertifyOptions opts;
    opts.tau = scenario.coupling.delay;
    CertificateReport report =
        certify(scenario.system, scenario.graph, scenario.coupling.alpha, leader_start(scenario), opts);
    certify_seconds = elapsed_seconds(t_cert);
    summary["certificates"] = certificates_to_json(report);

    // consistency data: worst-case J_ext abscissa along the simulated path
    // (diverged runs keep their truncated prefix)
    if (traj.samples() > 1) {
      size_t stride = std::max<size_t>(1, traj.samples() / 50);
      summary["trajectory_spectral_abscissa"] = max_extended_spectral_abscissa(
          scenario.system, scenario.graph, scenario.coupling.alpha, traj, stride);
    }
  }

  fs::path traj_path = out_dir / "trajectory.csv";
  fs::path err_path = out_dir / "error.csv";
  write_trajectory_csv(traj_path, traj, scenario.full_resolution);
  write_error_csv(err_path, traj, metrics.error_series);
  summary["outputs"] = {{"trajectory_csv", traj_path.string()}, {"error_csv", err_path.string()}};
  summary["timing"] = {{"integrate_seconds", integrate_seconds},
                       {"certify_seconds", certify_seconds},
                       {"total_seconds", elapsed_seconds(t0)}};

  fs::path summary_path = out_dir / "summary.json";
  write_summary(summary_path, summary);

  RunResult result;
  result.summary_path = summary_path.string();
  if (traj.diverged) {
    result.exit_code = kExitDivergence;
    result.error_message = "trajectory diverged at t=" + format_double(traj.divergence_time);
  }
  return result;
}

RunResult certify_scenario(const Scenario& scenario) {
  auto t0 = std::chrono::steady_clock::now();
  fs::path out_dir = resolve_output_dir(scenario);
  fs::create_directories(out_dir);

  CertifyOptions opts;
  opts.tau = scenario.coupling.delay;
  CertificateReport report =
      certify(scenario.system, scenario.graph, scenario.coupling.alpha, leader_start(scenario), opts);

  ordered_json summary;
  summary["scenario"] = ordered_json::parse(scenario.raw);
  summary["mode"] = "certify";
  summary["status"] = "ok";
  summary["certificates"] = certificates_to_json(report);
  summary["linear_part_spectrum"] = ordered_json::array();
  for (const auto& ev : eigenvalues(scenario.system.linear_part))
    summary["linear_part_spectrum"].push_back({{"re", ev.real()}, {"im", ev.imag()}});
  summary["timing"] = {{"total_seconds", elapsed_seconds(t0)}};

  fs::path summary_path = out_dir / "summary.json";
  write_summary(summary_path, summary);
  return RunResult{kExitOk, summary_path.string(), ""};
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "alpha") return SweepParameter::alpha;
  if (name == "sigma2") return SweepParameter::sigma2;
  if (name == "epsilon") return SweepParameter::epsilon;
  if (name == "tau_a") return SweepParameter::tau_a;
  throw ConfigError("unknown sweep parameter '" + name + "' (alpha, sigma2, epsilon, tau_a)");
}

namespace {

struct SweepRow {
  double value = 0.0;
  double e_inf = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> convergence_time;
  double spectral_abscissa = std::numeric_limits<double>::quiet_NaN();
  double theorem2_margin = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
  std::string note;
};

Scenario apply_sweep_value(const Scenario& base, SweepParameter param, double value,
                           uint64_t run_seed) {
  Scenario s = base;
  s.seed = run_seed;
  switch (param) {
    case SweepParameter::alpha:
      if (!(value > 0.0)) throw ConfigError("sweep: alpha values must be > 0");
      s.coupling.alpha = value;
      break;
    case SweepParameter::sigma2:
      if (value < 0.0) throw ConfigError("sweep: sigma2 values must be >= 0");
      s.coupling.noise_variance = value;
      break;
    case SweepParameter::epsilon:
      if (value < 0.0) throw ConfigError("sweep: epsilon values must be >= 0");
      s.coupling.heterogeneity = value;
      if (value > 0.0)
        s.coupling.hetero_directions = heterogeneity_directions(
            s.graph.num_agents, s.system.dim, derive_seed(base.seed, 1));
      break;
    case SweepParameter::tau_a:
      if (!(value > 0.0)) throw ConfigError("sweep: tau_a values must be > 0");
      if (!s.switching) throw ConfigError("sweep: tau_a requires a switching scenario");
      s.switching->average_dwell = value;
      break;
  }
  return s;
}

void write_eigenvalue_scatter(const fs::path& path, const Scenario& s, const Trajectory& traj) {
  CsvWriter csv(path, "t,re,im");
  size_t stride = std::max<size_t>(1, traj.samples() / 25);
  std::vector<std::string> cells;
  for (size_t k = 0; k < traj.samples(); k += stride) {
    NetworkState x = traj.network_state(k);
    Matrix jext = extended_jacobian(s.system, s.graph, s.coupling.alpha, x);
    for (const auto& ev : eigenvalues(jext)) {
      cells.clear();
      cells.push_back(format_double(traj.times[k]));
      cells.push_back(format_double(ev.real()));
      cells.push_back(format_double(ev.imag()));
      csv.row(cells);
    }
  }
}

std::string alpha_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  std::string tag = buf;
  for (char& c : tag)
    if (c == '.' || c == '-' || c == '+') c = '_';
  return tag;
}

}  // namespace

RunResult run_sweep(const Scenario& base, SweepParameter param, std::span<const double> values,
                    int workers) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  if (param == SweepParameter::tau_a && !base.switching)
    throw ConfigError("sweep: tau_a requires a switching scenario");
  auto t0 = std::chrono::steady_clock::now();
  fs::path out_dir = resolve_output_dir(base);
  fs::create_directories(out_dir);

  const int n = static_cast<int>(values.size());
  std::vector<SweepRow> rows(n);
  if (workers <= 0) workers = parallel::max_threads();

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (n > 1)
#endif
  for (int k = 0; k < n; ++k) {
    SweepRow& row = rows[k];
    row.value = values[k];
    try {
      Scenario s = apply_sweep_value(base, param, values[k], derive_seed(base.seed, 100 + k));
      NetworkState x0 = build_initial_state(s);
      Trajectory traj = integrate_scenario(s, x0);

      SyncMetrics m = compute_metrics(traj, s.analysis.convergence_threshold,
                                      s.analysis.window_fraction);
      row.e_inf = m.steady_state_error;
      row.convergence_time = m.convergence_time;
      if (traj.diverged) {
        row.failed = true;
        row.note = "diverged at t=" + format_double(traj.divergence_time);
      }

      CertifyOptions copts;
      copts.tau = s.coupling.delay;
      copts.sample_count = 200;
      copts.sample_horizon = 50.0;
      copts.jext_samples = 25;
      CertificateReport cert = certify(s.system, s.graph, s.coupling.alpha, leader_start(s), copts);
      row.theorem2_margin = cert.theorem2_margin;

      // truncated trajectories still carry valid states for the spectral scan
      if (traj.samples() > 1) {
        size_t stride = std::max<size_t>(1, traj.samples() / 25);
        row.spectral_abscissa = max_extended_spectral_abscissa(s.system, s.graph, s.coupling.alpha,
                                                               traj, stride);
        if (param == SweepParameter::alpha)
          write_eigenvalue_scatter(out_dir / ("eig_scatter_alpha_" + alpha_tag(values[k]) + ".csv"),
                                   s, traj);
      }
    } catch (const std::exception& e) {
      row.failed = true;
      row.note = e.what();
    }
  }

  CsvWriter csv(out_dir / "sweep.csv", "value,E_inf,convergence_time,spectral_abscissa,theorem2_margin");
  for (const auto& row : rows) {
    std::vector<std::string> cells{format_double(row.value), format_double(row.e_inf),
                                   row.convergence_time ? format_double(*row.convergence_time) : "",
                                   format_double(row.spectral_abscissa),
                                   format_double(row.theorem2_margin)};
    csv.row(cells);
  }

  ordered_json summary;
  summary["scenario"] = ordered_json::parse(base.raw);
  summary["mode"] = "sweep";
  summary["status"] = "ok";
  switch (param) {
    case SweepParameter::alpha: summary["parameter"] = "alpha"; break;
    case SweepParameter::sigma2: summary["parameter"] = "sigma2"; break;
    case SweepParameter::epsilon: summary["parameter"] = "epsilon"; break;
    case SweepParameter::tau_a: summary["parameter"] = "tau_a"; break;
  }
  summary["rows"] = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r;
    r["value"] = row.value;
    r["E_inf"] = row.e_inf;
    r["convergence_time"] = row.convergence_time ? ordered_json(*row.convergence_time) : nullptr;
    r["spectral_abscissa"] = row.spectral_abscissa;
    r["theorem2_margin"] = row.theorem2_margin;
    r["failed"] = row.failed;
    r["note"] = row.note;
    summary["rows"].push_back(r);
  }
  summary["timing"] = {{"total_seconds", elapsed_seconds(t0)}};
  fs::path summary_path = out_dir / "sweep_summary.json";
  write_summary(summary_path, summary);
  return RunResult{kExitOk, summary_path.string(), ""};
}

RunResult run_bench(std::span<const int> sizes, const std::string& output_dir) {
  if (sizes.empty()) throw ConfigError("bench: empty size list");
  for (int n : sizes)
    if (n < 2) throw ConfigError("bench: sizes must be >= 2");

  auto t0 = std::chrono::steady_clock::now();
  fs::path out_dir = output_dir;
  fs::create_directories(out_dir);

  SystemSpec spec = builtin_system("lu");
  std::vector<double> leader_x0(spec.dim, 1.0);

  ordered_json detail = ordered_json::array();
  CsvWriter csv(out_dir / "bench.csv", "N,seconds");
  for (int n : sizes) {
    DirectedGraph g = chain_topology(n);

    auto t_cert = std::chrono::steady_clock::now();
    CertifyOptions opts;  // attractor sampling + theorem 2 + J_ext abscissa at 100 states
    CertificateReport report = certify(spec, g, 0.95, leader_x0, opts);
    double cert_seconds = elapsed_seconds(t_cert);

    // integration throughput: a short run, normalized per simulated second
    NetworkState x0(n, spec.dim);
    Rng rng(derive_seed(7, n));
    for (int i = 0; i < n; ++i) {
      auto xi = x0.agent(i);
      for (int d = 0; d < spec.dim; ++d)
        xi[d] = 1.0 + (i == 0 ? 0.0 : rng.uniform(-0.5, 0.5));
    }
    CouplingConfig cfg;
    cfg.alpha = 0.95;
    const double sim_horizon = 5.0;
    auto t_int = std::chrono::steady_clock::now();
    Trajectory traj = integrate_ode(spec, g, cfg, x0, 1e-3, sim_horizon);
    double int_seconds = elapsed_seconds(t_int);

    csv.row(std::vector<std::string>{std::to_string(n), format_double(cert_seconds)});
    ordered_json dj;
    dj["N"] = n;
    dj["certify_seconds"] = cert_seconds;
    dj["integrate_seconds_per_sim_second"] = int_seconds / sim_horizon;
    dj["theorem2_margin"] = report.theorem2_margin;
    dj["spectral_abscissa"] = report.spectral_abscissa;
    dj["integration_diverged"] = traj.diverged;
    detail.push_back(dj);
  }

  ordered_json summary;
  summary["mode"] = "bench";
  summary["status"] = "ok";
  summary["rows"] = detail;
  summary["timing"] = {{"total_seconds", elapsed_seconds(t0)}};
  fs::path summary_path = out_dir / "bench_summary.json";
  write_summary(summary_path, summary);
  return RunResult{kExitOk, summary_path.string(), ""};
}

RunResult run_securecomm_demo(const Scenario& scenario) {
  if (scenario.graph.num_agents != 2)
    throw ConfigError("securecomm: scenario must hold exactly 2 agents (leader + follower)");

  auto t0 = std::chrono::steady_clock::now();
  fs::path out_dir = resolve_output_dir(scenario);
  fs::create_directories(out_dir);

  NetworkState x0 = build_initial_state(scenario);
  Trajectory traj = integrate_scenario(scenario, x0);

  SyncMetrics metrics =
      compute_metrics(traj, scenario.analysis.convergence_threshold, scenario.analysis.window_fraction);

  // transmission window: past the synchronization transient when it exists,
  // else the trailing 3 seconds (degraded recovery, still reported)
  const double window_len = 3.0;
  bool degraded = !metrics.convergence_time.has_value() || traj.diverged;
  double t_start = degraded ? std::max(0.0, traj.times.back() - window_len)
                            : std::min(*metrics.convergence_time + 2.0,
                                       std::max(0.0, traj.times.back() - window_len));

  size_t k0 = 0;
  while (k0 + 1 < traj.samples() && traj.times[k0] < t_start) ++k0;
  size_t k1 = k0;
  while (k1 + 1 < traj.samples() && traj.times[k1] < t_start + window_len) ++k1;

  std::vector<double> times, message;
  std::vector<std::vector<double>> leader_states, follower_states;
  for (size_t k = k0; k <= k1; ++k) {
    double t = traj.times[k];
    times.push_back(t);
    message.push_back(demo_message(t - traj.times[k0]));
    auto ls = traj.agent_state(k, 0);
    auto fs_ = traj.agent_state(k, 1);
    leader_states.emplace_back(ls.begin(), ls.end());
    follower_states.emplace_back(fs_.begin(), fs_.end());
  }

  MaskedSignal signal = mask(times, message, leader_states);
  signal.message_desc = "0.8*sin(2*pi*2*t)";
  std::vector<double> recovered = demask(signal, follower_states);
  double snr_gain = snr_improvement_db(message, signal.samples, recovered);

  double max_recovery_error = 0.0;
  for (size_t k = 0; k < message.size(); ++k)
    max_recovery_error = std::max(max_recovery_error, std::abs(recovered[k] - message[k]));

  CsvWriter csv(out_dir / "securecomm.csv", "t,m,s,mhat,error");
  std::vector<std::string> cells;
  for (size_t k = 0; k < message.size(); ++k) {
    cells.clear();
    cells.push_back(format_double(times[k]));
    cells.push_back(format_double(message[k]));
    cells.push_back(format_double(signal.samples[k]));
    cells.push_back(format_double(recovered[k]));
    cells.push_back(format_double(recovered[k] - message[k]));
    csv.row(cells);
  }

  CertifyOptions copts;
  copts.tau = scenario.coupling.delay;
  CertificateReport cert =
      certify(scenario.system, scenario.graph, scenario.coupling.alpha, leader_start(scenario), copts);

  ordered_json summary;
  summary["scenario"] = ordered_json::parse(scenario.raw);
  summary["mode"] = "securecomm";
  summary["status"] = traj.diverged ? "diverged" : "ok";
  summary["metrics"] = metrics_to_json(metrics);
  summary["certificates"] = certificates_to_json(cert);
  summary["securecomm"] = {{"snr_improvement_db", snr_gain},
                           {"max_recovery_error", max_recovery_error},
                           {"window_start", times.front()},
                           {"window_end", times.back()},
                           {"degraded", degraded},
                           {"message", signal.message_desc},
                           {"mask", signal.mask_desc}};
  summary["timing"] = {{"total_seconds", elapsed_seconds(t0)}};

  fs::path summary_path = out_dir / "summary.json";
  write_summary(summary_path, summary);

  RunResult result;
  result.summary_path = summary_path.string();
  if (traj.diverged) {
    result.exit_code = kExitDivergence;
    result.error_message = "trajectory diverged at t=" + format_double(traj.divergence_time);
  }
  return result;
}

}  // namespace chaosnet
