#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chaosnet/errors.hpp"
#include "chaosnet/scenario.hpp"

namespace {

using chaosnet::ExitCode;

void print_error_json(int code, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"] = {{"code", code}, {"message", message}};
  std::printf("%s\n", err.dump().c_str());
}

int finish(const chaosnet::RunResult& result) {
  if (result.exit_code != chaosnet::kExitOk)
    print_error_json(result.exit_code, result.error_message);
  else
    std::printf("{\"status\":\"ok\",\"summary\":\"%s\"}\n", result.summary_path.c_str());
  return result.exit_code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return finish(fn());
  } catch (const chaosnet::ConfigError& e) {
    print_error_json(chaosnet::kExitConfigError, e.what());
    return chaosnet::kExitConfigError;
  } catch (const chaosnet::InvalidArgument& e) {
    print_error_json(chaosnet::kExitConfigError, e.what());
    return chaosnet::kExitConfigError;
  } catch (const chaosnet::DivergenceError& e) {
    print_error_json(chaosnet::kExitDivergence, e.what());
    return chaosnet::kExitDivergence;
  } catch (const std::exception& e) {
    print_error_json(chaosnet::kExitInternalError, e.what());
    return chaosnet::kExitInternalError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-follower chaotic network simulation and certification lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::vector<int> bench_sizes{5, 10, 20};
  std::string bench_out = "out/bench";
  int workers = 0;

  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and write CSV/JSON artifacts");
  simulate->add_option("config", config_path, "scenario JSON file")->required();

  auto* certify = app.add_subcommand("certify", "Run the certificate pipeline only (no network integration)");
  certify->add_option("config", config_path, "scenario JSON file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a scenario across a parameter range");
  sweep->add_option("config", config_path, "base scenario JSON file")->required();
  sweep->add_option("--param", sweep_param, "alpha | sigma2 | epsilon | tau_a")->required();
  sweep->add_option("--values", sweep_values, "parameter values")->required()->delimiter(',');
  sweep->add_option("--workers", workers, "concurrent member runs (0 = auto)");

  auto* bench = app.add_subcommand("bench", "Time the certification pipeline for growing networks");
  bench->add_option("--sizes", bench_sizes, "agent counts")->delimiter(',');
  bench->add_option("--out", bench_out, "output directory");

  auto* securecomm = app.add_subcommand("securecomm", "Chaotic-masking demo over a synchronized pair");
  securecomm->add_option("config", config_path, "two-agent scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed())
    return guarded([&] { return chaosnet::run_scenario(chaosnet::load_scenario_file(config_path)); });
  if (certify->parsed())
    return guarded([&] { return chaosnet::certify_scenario(chaosnet::load_scenario_file(config_path)); });
  if (sweep->parsed())
    return guarded([&] {
      auto scenario = chaosnet::load_scenario_file(config_path);
      auto param = chaosnet::parse_sweep_parameter(sweep_param);
      return chaosnet::run_sweep(scenario, param, sweep_values, workers);
    });
  if (bench->parsed())
    return guarded([&] { return chaosnet::run_bench(bench_sizes, bench_out); });
  if (securecomm->parsed())
    return guarded([&] {
      return chaosnet::run_securecomm_demo(chaosnet::load_scenario_file(config_path));
    });
  return chaosnet::kExitConfigError;
}
