#include "chaosnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaosnet/errors.hpp"
#include "chaosnet/parallel.hpp"
#include "chaosnet/stability.hpp"

namespace chaosnet {

namespace {

template <bool Parallel>
std::vector<double> error_series_impl(const Trajectory& traj) {
  if (traj.num_agents < 2) throw InvalidArgument("sync_error_series: need at least 2 agents");
  const int samples = static_cast<int>(traj.samples());
  const int n = traj.dim;
  std::vector<double> e(samples);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (Parallel && samples >= parallel::kMinParallelWork)
#endif
  for (int k = 0; k < samples; ++k) {
    auto leader = traj.agent_state(k, 0);
    double sum = 0.0;
    for (int i = 1; i < traj.num_agents; ++i) {
      auto xi = traj.agent_state(k, i);
      double sq = 0.0;
      for (int c = 0; c < n; ++c) {
        double d = xi[c] - leader[c];
        sq += d * d;
      }
      sum += std::sqrt(sq);
    }
    e[k] = sum / (traj.num_agents - 1);
  }
  return e;
}

size_t window_start(const Trajectory& traj, double window_fraction) {
  size_t samples = traj.samples();
  auto start = static_cast<size_t>(std::floor(static_cast<double>(samples) * (1.0 - window_fraction)));
  if (start >= samples) start = samples - 1;
  return start;
}

}  // namespace

std::vector<double> sync_error_series(const Trajectory& traj) { return error_series_impl<true>(traj); }
std::vector<double> sync_error_series_serial(const Trajectory& traj) {
  return error_series_impl<false>(traj);
}

double steady_state_error(const Trajectory& traj, double window_fraction) {
  if (window_fraction <= 0.0 || window_fraction > 1.0)
    throw InvalidArgument("steady_state_error: window fraction must lie in (0, 1]");
  std::vector<double> e = sync_error_series(traj);
  size_t start = window_start(traj, window_fraction);
  if (e.size() - start < 100)
    throw InvalidArgument("steady_state_error: final window holds fewer than 100 samples");
  double sum = 0.0;
  for (size_t k = start; k < e.size(); ++k) sum += e[k];
  return sum / static_cast<double>(e.size() - start);
}

std::optional<double> convergence_time(const Trajectory& traj, double threshold, double hold) {
  if (threshold <= 0.0) throw InvalidArgument("convergence_time: threshold must be > 0");
  std::vector<double> e = sync_error_series(traj);

  size_t run_start = e.size();
  for (size_t k = 0; k < e.size(); ++k) {
    if (e[k] < threshold) {
      if (run_start == e.size()) run_start = k;
      if (traj.times[k] - traj.times[run_start] >= hold) return traj.times[run_start];
    } else {
      run_start = e.size();
    }
  }
  return std::nullopt;
}

PhaseOffsets phase_offsets(const Trajectory& traj, double window) {
  if (traj.num_agents < 2) throw InvalidArgument("phase_offsets: need at least 2 agents");
  double horizon = traj.times.back();
  if (window <= 0.0 || window > 0.5 * horizon)
    throw InvalidArgument("phase_offsets: window must lie in (0, horizon/2]");

  size_t start = 0;
  while (start < traj.samples() && traj.times[start] < horizon - window) ++start;
  size_t count = traj.samples() - start;
  const int n = traj.dim;

  PhaseOffsets result;
  result.offsets.assign(traj.num_agents - 1, std::vector<double>(n, 0.0));
  result.fluctuation_std.assign(traj.num_agents - 1, 0.0);

  for (int i = 1; i < traj.num_agents; ++i) {
    auto& c = result.offsets[i - 1];
    for (size_t k = start; k < traj.samples(); ++k) {
      auto leader = traj.agent_state(k, 0);
      auto xi = traj.agent_state(k, i);
      for (int d = 0; d < n; ++d) c[d] += xi[d] - leader[d];
    }
    for (int d = 0; d < n; ++d) c[d] /= static_cast<double>(count);

    double var = 0.0;
    for (size_t k = start; k < traj.samples(); ++k) {
      auto leader = traj.agent_state(k, 0);
      auto xi = traj.agent_state(k, i);
      double sq = 0.0;
      for (int d = 0; d < n; ++d) {
        double r = xi[d] - leader[d] - c[d];
        sq += r * r;
      }
      var += sq;
    }
    result.fluctuation_std[i - 1] = std::sqrt(var / static_cast<double>(count));
  }
  return result;
}

SyncMetrics compute_metrics(const Trajectory& traj, double convergence_threshold,
                            double window_fraction) {
  SyncMetrics m;
  m.times = traj.times;
  m.error_series = sync_error_series(traj);
  m.diverged = traj.diverged;
  m.divergence_time = traj.divergence_time;

  size_t start = window_start(traj, window_fraction);
  if (traj.samples() - start >= 100) {
    m.steady_state_error = steady_state_error(traj, window_fraction);
  } else {  // short or truncated run: average what is there
    double sum = 0.0;
    for (size_t k = start; k < m.error_series.size(); ++k) sum += m.error_series[k];
    m.steady_state_error = sum / static_cast<double>(m.error_series.size() - start);
  }
  m.convergence_time = convergence_time(traj, convergence_threshold);

  double window = std::max(traj.meta.dt, 0.1 * traj.times.back());
  if (window <= 0.5 * traj.times.back()) {
    PhaseOffsets po = phase_offsets(traj, window);
    m.offsets = std::move(po.offsets);
    m.offset_fluctuation = std::move(po.fluctuation_std);
  }
  return m;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("fit_slope: need at least two paired points");
  double mx = 0.0, my = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    num += (x[k] - mx) * (y[k] - my);
    den += (x[k] - mx) * (x[k] - mx);
  }
  if (den == 0.0) throw InvalidArgument("fit_slope: degenerate abscissae");
  return num / den;
}

HeterogeneityScaling heterogeneity_scaling(const SystemSpec& spec, const DirectedGraph& g,
                                           double alpha, std::span<const double> epsilons,
                                           uint64_t seed, double dt, double horizon) {
  if (epsilons.empty()) throw InvalidArgument("heterogeneity_scaling: empty epsilon list");
  for (size_t k = 0; k < epsilons.size(); ++k) {
    if (epsilons[k] <= 0.0) throw InvalidArgument("heterogeneity_scaling: epsilons must be > 0");
    if (k > 0 && epsilons[k] <= epsilons[k - 1])
      throw InvalidArgument("heterogeneity_scaling: epsilons must increase");
  }

  HeterogeneityScaling result;
  result.epsilons.assign(epsilons.begin(), epsilons.end());

  // base-configuration certificate (the sweep is only meaningful when the
  // homogeneous network is certified stable)
  std::vector<double> leader_x0(spec.dim, 1.0);
  CertifyOptions copts;
  copts.sample_count = 200;
  copts.sample_horizon = 50.0;
  CertificateReport cert = certify(spec, g, alpha, leader_x0, copts);
  result.certificate_margin = cert.theorem2_margin;
  result.certified = cert.theorem2_ok;

  Rng init_rng(derive_seed(seed, 9000));
  NetworkState x0(g.num_agents, spec.dim);
  for (int i = 0; i < g.num_agents; ++i) {
    auto xi = x0.agent(i);
    for (int d = 0; d < spec.dim; ++d)
      xi[d] = leader_x0[d] + (i == 0 ? 0.0 : init_rng.uniform(-0.5, 0.5));
  }

  std::vector<double> log_eps, log_err;
  for (size_t k = 0; k < epsilons.size(); ++k) {
    CouplingConfig cfg;
    cfg.alpha = alpha;
    cfg.heterogeneity = epsilons[k];
    cfg.hetero_directions = heterogeneity_directions(g.num_agents, spec.dim, derive_seed(seed, 1));

    Trajectory traj = integrate_ode(spec, g, cfg, x0, dt, horizon);
    result.run_diverged.push_back(traj.diverged);
    if (traj.diverged) {
      result.steady_errors.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double err = steady_state_error(traj);
    result.steady_errors.push_back(err);
    if (err > 0.0) {
      log_eps.push_back(std::log10(epsilons[k]));
      log_err.push_back(std::log10(err));
    }
  }

  if (log_eps.size() >= 2) result.slope = fit_slope(log_eps, log_err);
  return result;
}

}  // namespace chaosnet
