#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaosnet/rng.hpp"
#include "chaosnet/systems.hpp"
#include "chaosnet/topology.hpp"

namespace chaosnet {

// Coupling gain, communication delay, per-unit-time noise variance and the
// heterogeneity magnitude with its per-agent unit directions.
struct CouplingConfig {
  double alpha = 1.0;          // > 0
  double delay = 0.0;          // tau, seconds
  double noise_variance = 0.0; // sigma^2
  double heterogeneity = 0.0;  // epsilon
  std::vector<std::vector<double>> hetero_directions;  // unit u_i per agent; u_0 unused
};

void validate_coupling(const CouplingConfig& cfg, int num_agents, int dim);

// Fixed random unit vectors for the heterogeneity term, seeded. The leader
// direction is zeroed: the reference trajectory stays a member of the model
// class.
std::vector<std::vector<double>> heterogeneity_directions(int num_agents, int dim, uint64_t seed);

// Stacked agent states at one instant, agent-major layout.
struct NetworkState {
  double time = 0.0;
  int num_agents = 0;
  int dim = 0;
  std::vector<double> states;

  NetworkState() = default;
  NetworkState(int num_agents_, int dim_)
      : num_agents(num_agents_), dim(dim_), states(static_cast<size_t>(num_agents_) * dim_, 0.0) {}

  std::span<double> agent(int i) { return {states.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)}; }
  std::span<const double> agent(int i) const {
    return {states.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
  }
  int stacked_size() const { return num_agents * dim; }
};

// Which transmitted signals age by the delay tau.
//   all_delayed    - both sides of each coupling difference are evaluated at
//                    t - tau, so the coupling still vanishes identically on
//                    the synchronization manifold (default).
//   neighbor_only  - only the received neighbor state is delayed; the agent's
//                    own state stays current.
//   leader_literal - only signals transmitted by the leader are delayed.
enum class DelayMode { all_delayed, neighbor_only, leader_literal };

// Leader derivative is the uncoupled vector field; follower i adds
// alpha * sum_j a_ij (G(x_j) - G(x_i)) and, when epsilon > 0, epsilon * u_i.
// Writes the stacked derivative into out. OpenMP-parallel across agents.
void coupled_field(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                   const NetworkState& x, std::span<double> out);

// Serial reference implementation, kept for testing against the parallel path.
void coupled_field_serial(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                          const NetworkState& x, std::span<double> out);

// Stacked-state lookup at an earlier time; fills out with all agents' states.
using HistoryFn = std::function<void(double t, std::span<double> out)>;

// Same as coupled_field with transmitted states aged by cfg.delay, resolved
// through the history lookup according to the delay mode.
void delayed_coupled_field(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                           const NetworkState& x, const HistoryFn& history, DelayMode mode,
                           std::span<double> out);

void delayed_coupled_field_serial(const SystemSpec& spec, const DirectedGraph& g,
                                  const CouplingConfig& cfg, const NetworkState& x,
                                  const HistoryFn& history, DelayMode mode, std::span<double> out);

// Per-component i.i.d. Gaussian increments with variance sigma^2 * dt
// (diffusion scaling), leader included. Draw order is agent-major and fixed,
// so a given rng state always yields the same stacked perturbation.
std::vector<double> noise_increment(const CouplingConfig& cfg, double dt, int num_agents, int dim,
                                    Rng& rng);

}  // namespace chaosnet
