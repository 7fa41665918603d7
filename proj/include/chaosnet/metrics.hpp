#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chaosnet/integrate.hpp"
#include "chaosnet/systems.hpp"
#include "chaosnet/topology.hpp"

namespace chaosnet {

// Synchronization summary of one trajectory.
struct SyncMetrics {
  std::vector<double> times;
  std::vector<double> error_series;           // E(t_k)
  double steady_state_error = 0.0;            // mean E over the final window
  std::optional<double> convergence_time;     // first sustained sub-threshold instant
  std::vector<std::vector<double>> offsets;   // c_i per follower
  std::vector<double> offset_fluctuation;     // std of |e_i(t) - c_i| per follower
  bool diverged = false;
  double divergence_time = 0.0;
};

// E(t_k) = 1/(N-1) sum_{i>=2} |x_i(t_k) - x_1(t_k)|_2
std::vector<double> sync_error_series(const Trajectory& traj);
std::vector<double> sync_error_series_serial(const Trajectory& traj);

// Mean of E over the trailing window_fraction of the horizon. The window must
// hold at least 100 samples.
double steady_state_error(const Trajectory& traj, double window_fraction = 0.1);

// First t where E stays below the threshold for `hold` consecutive seconds
// (sustained, so chaotic transient crossings do not count).
std::optional<double> convergence_time(const Trajectory& traj, double threshold,
                                       double hold = 1.0);

struct PhaseOffsets {
  std::vector<std::vector<double>> offsets;
  std::vector<double> fluctuation_std;
};

// Time-average of x_i - x_1 per follower over the trailing `window` seconds,
// with the residual fluctuation's standard deviation.
PhaseOffsets phase_offsets(const Trajectory& traj, double window);

SyncMetrics compute_metrics(const Trajectory& traj, double convergence_threshold,
                            double window_fraction = 0.1);

struct HeterogeneityScaling {
  double slope = 0.0;                 // log-log fit of steady error vs epsilon
  std::vector<double> epsilons;
  std::vector<double> steady_errors;
  std::vector<bool> run_diverged;
  double certificate_margin = 0.0;    // theorem-2 margin of the base configuration
  bool certified = false;             // margin < 0
};

// Steady-state error as a function of the heterogeneity magnitude: one run
// per epsilon (seeded initial ball, ODE path), log-log slope fitted over the
// non-diverged runs.
HeterogeneityScaling heterogeneity_scaling(const SystemSpec& spec, const DirectedGraph& g,
                                           double alpha, std::span<const double> epsilons,
                                           uint64_t seed, double dt = 1e-3, double horizon = 40.0);

// Least-squares slope of y against x (used by the log-log fit; exposed for
// testing against synthetic data).
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace chaosnet
