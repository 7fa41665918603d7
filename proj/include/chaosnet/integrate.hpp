#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaosnet/network.hpp"
#include "chaosnet/systems.hpp"
#include "chaosnet/topology.hpp"

namespace chaosnet {

// Any |state component| beyond this (or any non-finite value) counts as
// numerical divergence; attractor scales here are O(10^2).
inline constexpr double kDivergenceThreshold = 1e6;

struct TrajectoryMeta {
  double dt = 0.0;
  uint64_t seed = 0;
  std::string config_snapshot;
};

// Uniformly sampled stacked states over [0, horizon]. On divergence the
// trajectory is truncated at the failing step and flagged.
struct Trajectory {
  int num_agents = 0;
  int dim = 0;
  std::vector<double> times;
  std::vector<double> data;  // sample-major, then agent-major
  TrajectoryMeta meta;
  bool diverged = false;
  double divergence_time = 0.0;

  size_t samples() const { return times.size(); }
  std::span<const double> state(size_t k) const {
    size_t stride = static_cast<size_t>(num_agents) * dim;
    return {data.data() + k * stride, stride};
  }
  std::span<const double> agent_state(size_t k, int i) const {
    return state(k).subspan(static_cast<size_t>(i) * dim, dim);
  }
  NetworkState network_state(size_t k) const;
};

// Ring of (time, stacked state) samples spanning at least the delay window.
// Lookups interpolate linearly between bracketing samples; times before the
// first record return the constant initial state, and times past the newest
// record extrapolate from the last two samples (needed when tau < dt).
class HistoryBuffer {
 public:
  HistoryBuffer(double span, double dt, std::vector<double> initial_state);

  void push(double t, std::span<const double> state);
  void lookup(double t, std::span<double> out) const;
  double newest_time() const;
  double oldest_time() const;

 private:
  double span_;
  double dt_;
  size_t stride_;
  std::vector<double> initial_;
  double start_time_ = 0.0;
  std::vector<double> times_;
  std::vector<double> states_;
  size_t head_ = 0;  // index of oldest retained sample
};

using FieldFn = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

// Classical fourth-order Runge-Kutta update. Throws DivergenceError if a
// stage derivative or the updated state is non-finite or out of range.
void rk4_step(const FieldFn& field, double t, std::span<const double> x, double dt,
              std::span<double> out);

// Explicit Euler update; the drift half of the stochastic stepper.
void euler_step(const FieldFn& field, double t, std::span<const double> x, double dt,
                std::span<double> out);

// Deterministic coupled network over [0, horizon] with RK4 at fixed dt.
// Requires cfg.delay == 0 and cfg.noise_variance == 0.
Trajectory integrate_ode(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                         const NetworkState& x0, double dt, double horizon);

struct DdeOptions {
  DelayMode mode = DelayMode::all_delayed;
  // Test hook: resolve every history query to the current integrand state,
  // which must reproduce the undelayed trajectory.
  bool force_current_history = false;
};

// Method of steps: RK4 whose stage evaluations read the delayed stacked state
// from a history buffer (constant pre-history equal to x0 before t = 0).
Trajectory integrate_dde(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                         const NetworkState& x0, double dt, double horizon, DdeOptions opts = {});

// Euler-Maruyama stepping: explicit Euler drift plus a Gaussian increment of
// variance sigma^2 * dt per component. sigma^2 = 0 degenerates to the exact
// explicit-Euler path.
Trajectory integrate_sde(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                         const NetworkState& x0, double dt, double horizon, uint64_t seed);

// Topology switches are applied at step boundaries: each RK4 step uses the
// schedule's graph at the step's start time.
Trajectory integrate_switched(const SystemSpec& spec, const SwitchingSchedule& sched,
                              const CouplingConfig& cfg, const NetworkState& x0, double dt,
                              double horizon);

// Single uncoupled agent (the leader alone); used for attractor sampling.
Trajectory integrate_agent(const SystemSpec& spec, std::span<const double> x0, double dt,
                           double horizon);

}  // namespace chaosnet
