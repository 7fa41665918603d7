#include "chaosnet/network.hpp"

#include <cmath>
#include <string>

#include "chaosnet/errors.hpp"
#include "chaosnet/parallel.hpp"

namespace chaosnet {

namespace {

void check_shapes(const SystemSpec& spec, const DirectedGraph& g, const NetworkState& x,
                  std::span<double> out) {
  if (x.dim != spec.dim)
    throw InvalidArgument("coupled_field: state dim " + std::to_string(x.dim) +
                          " does not match system dim " + std::to_string(spec.dim));
  if (x.num_agents != g.num_agents)
    throw InvalidArgument("coupled_field: state has " + std::to_string(x.num_agents) +
                          " agents, graph has " + std::to_string(g.num_agents));
  if (static_cast<int>(x.states.size()) != x.stacked_size() ||
      static_cast<int>(out.size()) != x.stacked_size())
    throw InvalidArgument("coupled_field: stacked buffer size mismatch");
}

// Derivative of one agent given precomputed nonlinear terms. g_own is the
// agent's own G used inside coupling differences; g_recv(j) is the received
// (possibly delayed) G of neighbor j.
template <typename RecvFn>
void agent_derivative(const SystemSpec& spec, const DirectedGraph& graph,
                      const CouplingConfig& cfg, const NetworkState& x, int i,
                      std::span<const double> g_current, std::span<const double> g_own,
                      RecvFn&& g_recv, std::span<double> out) {
  const int n = spec.dim;
  std::span<const double> xi = x.agent(i);
  std::span<double> dxi = out.subspan(static_cast<size_t>(i) * n, n);

  spec.linear_part.apply(xi, dxi);
  for (int k = 0; k < n; ++k) dxi[k] += g_current[static_cast<size_t>(i) * n + k];

  if (i == DirectedGraph::leader) return;  // the leader runs uncoupled

  for (int j = 0; j < graph.num_agents; ++j) {
    double w = graph.adjacency(i, j);
    if (w == 0.0) continue;
    const double* gj = g_recv(j);
    const double* gi = g_own.data() + static_cast<size_t>(i) * n;
    double aw = cfg.alpha * w;
    for (int k = 0; k < n; ++k) dxi[k] += aw * (gj[k] - gi[k]);
  }

  if (cfg.heterogeneity > 0.0) {
    const auto& u = cfg.hetero_directions[i];
    for (int k = 0; k < n; ++k) dxi[k] += cfg.heterogeneity * u[k];
  }
}

void eval_all_nonlinear(const SystemSpec& spec, const std::vector<double>& stacked, int num_agents,
                        std::vector<double>& g_out, bool parallel) {
  const int n = spec.dim;
  g_out.resize(stacked.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel && num_agents >= parallel::kMinParallelWork)
#endif
  for (int i = 0; i < num_agents; ++i) {
    spec.nonlinear({stacked.data() + static_cast<size_t>(i) * n, static_cast<size_t>(n)},
                   {g_out.data() + static_cast<size_t>(i) * n, static_cast<size_t>(n)});
  }
  (void)parallel;
}

template <bool Parallel>
void coupled_field_impl(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                        const NetworkState& x, std::span<double> out) {
  check_shapes(spec, g, x, out);
  validate_coupling(cfg, x.num_agents, x.dim);
  if (cfg.delay != 0.0)
    throw InvalidArgument("coupled_field: config carries a delay; use delayed_coupled_field");

  std::vector<double> g_all;
  eval_all_nonlinear(spec, x.states, x.num_agents, g_all, Parallel);

  auto recv = [&](int j) { return g_all.data() + static_cast<size_t>(j) * spec.dim; };
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel && x.num_agents >= parallel::kMinParallelWork)
#endif
  for (int i = 0; i < x.num_agents; ++i)
    agent_derivative(spec, g, cfg, x, i, g_all, g_all, recv, out);
}

template <bool Parallel>
void delayed_field_impl(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                        const NetworkState& x, const HistoryFn& history, DelayMode mode,
                        std::span<double> out) {
  check_shapes(spec, g, x, out);
  validate_coupling(cfg, x.num_agents, x.dim);
  if (cfg.delay <= 0.0)
    throw InvalidArgument("delayed_coupled_field: delay must be > 0");
  if (!history) throw InvalidArgument("delayed_coupled_field: missing history lookup");

  std::vector<double> delayed(x.states.size());
  history(x.time - cfg.delay, delayed);

  std::vector<double> g_cur, g_del;
  eval_all_nonlinear(spec, x.states, x.num_agents, g_cur, Parallel);
  eval_all_nonlinear(spec, delayed, x.num_agents, g_del, Parallel);

  const int n = spec.dim;
  auto recv = [&](int j) -> const double* {
    bool aged = mode != DelayMode::leader_literal || j == DirectedGraph::leader;
    return (aged ? g_del.data() : g_cur.data()) + static_cast<size_t>(j) * n;
  };
  // Under all_delayed the agent's own side of each difference ages too, so
  // identical histories cancel exactly and the sync manifold stays invariant.
  std::span<const double> own = mode == DelayMode::all_delayed
                                    ? std::span<const double>(g_del)
                                    : std::span<const double>(g_cur);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel && x.num_agents >= parallel::kMinParallelWork)
#endif
  for (int i = 0; i < x.num_agents; ++i)
    agent_derivative(spec, g, cfg, x, i, g_cur, own, recv, out);
}

}  // namespace

void validate_coupling(const CouplingConfig& cfg, int num_agents, int dim) {
  if (cfg.alpha < 0.0 || std::isnan(cfg.alpha))
    throw InvalidArgument("coupling: alpha must be positive (0 only as a decoupled boundary case)");
  if (cfg.delay < 0.0) throw InvalidArgument("coupling: delay must be >= 0");
  if (cfg.noise_variance < 0.0) throw InvalidArgument("coupling: noise variance must be >= 0");
  if (cfg.heterogeneity < 0.0) throw InvalidArgument("coupling: heterogeneity must be >= 0");
  if (cfg.heterogeneity > 0.0) {
    if (static_cast<int>(cfg.hetero_directions.size()) != num_agents)
      throw InvalidArgument("coupling: need one heterogeneity direction per agent");
    for (int i = 1; i < num_agents; ++i) {
      const auto& u = cfg.hetero_directions[i];
      if (static_cast<int>(u.size()) != dim)
        throw InvalidArgument("coupling: heterogeneity direction dim mismatch");
      double norm = 0.0;
      for (double v : u) norm += v * v;
      if (std::abs(std::sqrt(norm) - 1.0) > 1e-9)
        throw InvalidArgument("coupling: heterogeneity directions must be unit vectors");
    }
  }
}

std::vector<std::vector<double>> heterogeneity_directions(int num_agents, int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> dirs(num_agents, std::vector<double>(dim, 0.0));
  for (int i = 1; i < num_agents; ++i) {
    double norm = 0.0;
    while (norm < 1e-12) {
      norm = 0.0;
      for (int k = 0; k < dim; ++k) {
        dirs[i][k] = rng.normal();
        norm += dirs[i][k] * dirs[i][k];
      }
      norm = std::sqrt(norm);
    }
    for (int k = 0; k < dim; ++k) dirs[i][k] /= norm;
  }
  return dirs;
}

void coupled_field(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                   const NetworkState& x, std::span<double> out) {
  coupled_field_impl<true>(spec, g, cfg, x, out);
}

void coupled_field_serial(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                          const NetworkState& x, std::span<double> out) {
  coupled_field_impl<false>(spec, g, cfg, x, out);
}

void delayed_coupled_field(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                           const NetworkState& x, const HistoryFn& history, DelayMode mode,
                           std::span<double> out) {
  delayed_field_impl<true>(spec, g, cfg, x, history, mode, out);
}

void delayed_coupled_field_serial(const SystemSpec& spec, const DirectedGraph& g,
                                  const CouplingConfig& cfg, const NetworkState& x,
                                  const HistoryFn& history, DelayMode mode, std::span<double> out) {
  delayed_field_impl<false>(spec, g, cfg, x, history, mode, out);
}

std::vector<double> noise_increment(const CouplingConfig& cfg, double dt, int num_agents, int dim,
                                    Rng& rng) {
  if (dt <= 0.0) throw InvalidArgument("noise_increment: dt must be > 0");
  std::vector<double> xi(static_cast<size_t>(num_agents) * dim, 0.0);
  if (cfg.noise_variance == 0.0) return xi;
  double stddev = std::sqrt(cfg.noise_variance * dt);
  for (double& v : xi) v = stddev * rng.normal();
  return xi;
}

}  // namespace chaosnet
