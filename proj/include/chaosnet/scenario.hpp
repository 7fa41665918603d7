#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chaosnet/metrics.hpp"
#include "chaosnet/network.hpp"
#include "chaosnet/stability.hpp"
#include "chaosnet/systems.hpp"
#include "chaosnet/topology.hpp"

namespace chaosnet {

// Stable process exit codes (CLI contract).
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 2,
  kExitDivergence = 3,
  kExitInternalError = 4,
};

struct InitialCondition {
  bool explicit_states = false;
  std::vector<std::vector<double>> states;  // when explicit
  std::vector<double> leader;               // random-ball centre
  double radius = 0.5;
};

struct AnalysisRequest {
  bool certificates = true;
  bool metrics = true;
  bool securecomm = false;
  double convergence_threshold = 1e-2;
  double window_fraction = 0.1;
};

struct SwitchingRequest {
  std::vector<DirectedGraph> graphs;
  double average_dwell = 0.5;
};

// A fully validated scenario; `raw` carries the parsed config for echoing
// into the summary.
struct Scenario {
  std::string name;
  SystemSpec system;
  DirectedGraph graph;
  CouplingConfig coupling;
  DelayMode delay_mode = DelayMode::all_delayed;
  InitialCondition initial;
  double dt = 1e-3;
  double horizon = 30.0;
  AnalysisRequest analysis;
  std::optional<SwitchingRequest> switching;
  std::string output_dir = "out";
  bool full_resolution = false;
  uint64_t seed = 0;
  std::string raw;  // canonical JSON echo
};

Scenario parse_scenario_text(const std::string& json_text);  // throws ConfigError
Scenario load_scenario_file(const std::string& path);        // throws ConfigError

// Environment override for the output directory (applies to every command).
inline constexpr const char* kOutputDirEnvVar = "CHAOSNET_OUT";
std::string resolve_output_dir(const Scenario& scenario);

struct RunResult {
  int exit_code = kExitOk;
  std::string summary_path;
  std::string error_message;  // set when exit_code != 0
};

// simulate: integrate, write trajectory.csv + error.csv + summary.json.
// Divergence still writes partial artifacts and returns kExitDivergence.
RunResult run_scenario(const Scenario& scenario);

// certify: certificate pipeline only (leader sampling, no network
// integration); writes summary.json with the certificate report.
RunResult certify_scenario(const Scenario& scenario);

enum class SweepParameter { alpha, sigma2, epsilon, tau_a };
SweepParameter parse_sweep_parameter(const std::string& name);

// One run per value with seeds derived from the base seed; rows aggregated
// into sweep.csv (`value,E_inf,convergence_time,spectral_abscissa,
// theorem2_margin`). Alpha sweeps also emit an eigenvalue scatter CSV per
// value for the extended Jacobian along the trajectory. Member runs execute
// concurrently up to `workers`.
RunResult run_sweep(const Scenario& base, SweepParameter param, std::span<const double> values,
                    int workers = 0);

// Certification timing for growing chain networks; writes bench.csv
// (`N,seconds`) and bench_summary.json with per-size detail.
RunResult run_bench(std::span<const int> sizes, const std::string& output_dir);

// Two-agent masking demo: synchronize, transmit 0.8 sin(2 pi 2 t) over a
// post-transient window, report the SNR improvement; writes securecomm.csv
// (`t,m,s,mhat,error`) and summary.json.
RunResult run_securecomm_demo(const Scenario& scenario);

}  // namespace chaosnet
