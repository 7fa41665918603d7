#include "chaosnet/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaosnet/errors.hpp"

namespace chaosnet {

namespace {

void check_finite(std::span<const double> v, double t, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x) || std::abs(x) > kDivergenceThreshold)
      throw DivergenceError(t, std::string(what) + " left the representable regime at t=" +
                                   std::to_string(t));
  }
}

int step_count(double dt, double horizon) {
  if (dt <= 0.0) throw InvalidArgument("integrate: dt must be > 0");
  if (horizon <= 0.0) throw InvalidArgument("integrate: horizon must be > 0");
  return static_cast<int>(std::llround(horizon / dt));
}

struct Recorder {
  Trajectory traj;

  Recorder(int num_agents, int dim, int steps, double dt) {
    traj.num_agents = num_agents;
    traj.dim = dim;
    traj.meta.dt = dt;
    traj.times.reserve(steps + 1);
    traj.data.reserve(static_cast<size_t>(steps + 1) * num_agents * dim);
  }

  void record(double t, std::span<const double> x) {
    traj.times.push_back(t);
    traj.data.insert(traj.data.end(), x.begin(), x.end());
  }

  Trajectory finish() { return std::move(traj); }

  Trajectory finish_diverged(double t) {
    traj.diverged = true;
    traj.divergence_time = t;
    return std::move(traj);
  }
};

}  // namespace

NetworkState Trajectory::network_state(size_t k) const {
  NetworkState x(num_agents, dim);
  x.time = times[k];
  auto s = state(k);
  std::copy(s.begin(), s.end(), x.states.begin());
  return x;
}

HistoryBuffer::HistoryBuffer(double span, double dt, std::vector<double> initial_state)
    : span_(span), dt_(dt), stride_(initial_state.size()), initial_(std::move(initial_state)) {
  if (span <= 0.0) throw InvalidArgument("HistoryBuffer: span must be > 0");
  if (stride_ == 0) throw InvalidArgument("HistoryBuffer: empty state");
  times_.push_back(start_time_);
  states_ = initial_;
}

void HistoryBuffer::push(double t, std::span<const double> state) {
  if (state.size() != stride_) throw InvalidArgument("HistoryBuffer: state size mismatch");
  if (t <= times_.back()) throw InvalidState("HistoryBuffer: non-increasing push time");
  times_.push_back(t);
  states_.insert(states_.end(), state.begin(), state.end());

  // drop samples older than the retained window, keeping one sample of slack
  double cutoff = t - span_ - 2.0 * dt_;
  while (head_ + 1 < times_.size() && times_[head_ + 1] < cutoff) ++head_;
  if (head_ > 4096) {  // compact occasionally
    times_.erase(times_.begin(), times_.begin() + head_);
    states_.erase(states_.begin(), states_.begin() + head_ * stride_);
    head_ = 0;
  }
}

double HistoryBuffer::newest_time() const { return times_.back(); }
double HistoryBuffer::oldest_time() const { return times_[head_]; }

void HistoryBuffer::lookup(double t, std::span<double> out) const {
  if (out.size() != stride_) throw InvalidArgument("HistoryBuffer: output size mismatch");
  const double* base = states_.data();

  if (t <= start_time_) {  // constant pre-history
    std::copy(initial_.begin(), initial_.end(), out.begin());
    return;
  }
  if (t < times_[head_])
    throw InvalidState("HistoryBuffer: lookup at t=" + std::to_string(t) +
                       " precedes the retained range");

  size_t last = times_.size() - 1;
  if (t >= times_[last]) {
    if (last == 0 || t == times_[last]) {
      std::copy(base + last * stride_, base + (last + 1) * stride_, out.begin());
      return;
    }
    // linear extrapolation from the last two samples (stage queries when tau < dt)
    size_t a = last - 1, b = last;
    double w = (t - times_[a]) / (times_[b] - times_[a]);
    for (size_t k = 0; k < stride_; ++k)
      out[k] = base[a * stride_ + k] + w * (base[b * stride_ + k] - base[a * stride_ + k]);
    return;
  }

  // bracketing pair; samples are uniformly spaced so jump straight to it
  size_t lo = head_;
  size_t guess = head_ + static_cast<size_t>(std::floor((t - times_[head_]) / dt_));
  if (guess >= last) guess = last - 1;
  while (guess > lo && times_[guess] > t) --guess;
  while (guess + 1 < last && times_[guess + 1] <= t) ++guess;

  size_t a = guess, b = guess + 1;
  double w = (t - times_[a]) / (times_[b] - times_[a]);
  for (size_t k = 0; k < stride_; ++k)
    out[k] = base[a * stride_ + k] + w * (base[b * stride_ + k] - base[a * stride_ + k]);
}

void rk4_step(const FieldFn& field, double t, std::span<const double> x, double dt,
              std::span<double> out) {
  if (dt <= 0.0) throw InvalidArgument("rk4_step: dt must be > 0");
  const size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  field(t, x, k1);
  check_finite(k1, t, "rk4 stage derivative");
  for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  field(t + 0.5 * dt, tmp, k2);
  check_finite(k2, t, "rk4 stage derivative");
  for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  field(t + 0.5 * dt, tmp, k3);
  check_finite(k3, t, "rk4 stage derivative");
  for (size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  field(t + dt, tmp, k4);
  check_finite(k4, t, "rk4 stage derivative");

  for (size_t i = 0; i < n; ++i)
    out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  check_finite(out, t + dt, "state");
}

void euler_step(const FieldFn& field, double t, std::span<const double> x, double dt,
                std::span<double> out) {
  if (dt <= 0.0) throw InvalidArgument("euler_step: dt must be > 0");
  const size_t n = x.size();
  std::vector<double> dx(n);
  field(t, x, dx);
  check_finite(dx, t, "euler derivative");
  for (size_t i = 0; i < n; ++i) out[i] = x[i] + dt * dx[i];
  check_finite(out, t + dt, "state");
}

namespace {

Trajectory run_fixed_step(int num_agents, int dim, const NetworkState& x0, double dt,
                          double horizon,
                          const std::function<bool(int step, double t, std::vector<double>& x)>& advance) {
  const int steps = step_count(dt, horizon);
  Recorder rec(num_agents, dim, steps, dt);
  std::vector<double> x(x0.states);
  rec.record(0.0, x);
  for (int k = 0; k < steps; ++k) {
    double t = k * dt;
    try {
      if (!advance(k, t, x)) return rec.finish_diverged(t);
    } catch (const DivergenceError& e) {
      return rec.finish_diverged(e.time());
    }
    rec.record((k + 1) * dt, x);
  }
  return rec.finish();
}

void check_network_start(const SystemSpec& spec, const DirectedGraph& g, const NetworkState& x0) {
  if (x0.dim != spec.dim || x0.num_agents != g.num_agents ||
      static_cast<int>(x0.states.size()) != x0.stacked_size())
    throw InvalidArgument("integrate: initial state shape mismatch");
}

}  // namespace

Trajectory integrate_ode(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                         const NetworkState& x0, double dt, double horizon) {
  check_network_start(spec, g, x0);
  if (cfg.delay != 0.0) throw InvalidArgument("integrate_ode: delay must be 0 (use integrate_dde)");
  if (cfg.noise_variance != 0.0)
    throw InvalidArgument("integrate_ode: noise must be 0 (use integrate_sde)");

  NetworkState work = x0;
  FieldFn field = [&](double t, std::span<const double> x, std::span<double> dx) {
    work.time = t;
    std::copy(x.begin(), x.end(), work.states.begin());
    coupled_field(spec, g, cfg, work, dx);
  };

  std::vector<double> next(x0.states.size());
  Trajectory traj = run_fixed_step(x0.num_agents, x0.dim, x0, dt, horizon,
                                   [&](int, double t, std::vector<double>& x) {
                                     rk4_step(field, t, x, dt, next);
                                     x.swap(next);
                                     return true;
                                   });
  return traj;
}

Trajectory integrate_dde(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                         const NetworkState& x0, double dt, double horizon, DdeOptions opts) {
  check_network_start(spec, g, x0);
  if (cfg.delay <= 0.0) throw InvalidArgument("integrate_dde: delay must be > 0");

  HistoryBuffer buffer(cfg.delay + dt, dt, x0.states);
  NetworkState work = x0;
  std::vector<double> next(x0.states.size());

  // Stage states are what the hook must return: the current integrand value,
  // not the last accepted sample.
  std::span<const double> stage_view;
  HistoryFn history = [&](double t, std::span<double> out) {
    if (opts.force_current_history) {
      std::copy(stage_view.begin(), stage_view.end(), out.begin());
      return;
    }
    buffer.lookup(t, out);
  };

  FieldFn field = [&](double t, std::span<const double> x, std::span<double> dx) {
    work.time = t;
    std::copy(x.begin(), x.end(), work.states.begin());
    stage_view = x;
    delayed_coupled_field(spec, g, cfg, work, history, opts.mode, dx);
  };

  return run_fixed_step(x0.num_agents, x0.dim, x0, dt, horizon,
                        [&](int, double t, std::vector<double>& x) {
                          rk4_step(field, t, x, dt, next);
                          x.swap(next);
                          buffer.push(t + dt, x);
                          return true;
                        });
}

Trajectory integrate_sde(const SystemSpec& spec, const DirectedGraph& g, const CouplingConfig& cfg,
                         const NetworkState& x0, double dt, double horizon, uint64_t seed) {
  check_network_start(spec, g, x0);
  if (cfg.delay != 0.0) throw InvalidArgument("integrate_sde: delay must be 0");

  Rng rng(seed);
  NetworkState work = x0;
  FieldFn drift = [&](double t, std::span<const double> x, std::span<double> dx) {
    work.time = t;
    std::copy(x.begin(), x.end(), work.states.begin());
    coupled_field(spec, g, cfg, work, dx);
  };

  std::vector<double> next(x0.states.size());
  Trajectory traj = run_fixed_step(
      x0.num_agents, x0.dim, x0, dt, horizon, [&](int, double t, std::vector<double>& x) {
        euler_step(drift, t, x, dt, next);
        if (cfg.noise_variance > 0.0) {
          std::vector<double> xi = noise_increment(cfg, dt, x0.num_agents, x0.dim, rng);
          for (size_t i = 0; i < next.size(); ++i) next[i] += xi[i];
          check_finite(next, t + dt, "state");
        }
        x.swap(next);
        return true;
      });
  traj.meta.seed = seed;
  return traj;
}

Trajectory integrate_switched(const SystemSpec& spec, const SwitchingSchedule& sched,
                              const CouplingConfig& cfg, const NetworkState& x0, double dt,
                              double horizon) {
  if (sched.graphs.empty()) throw InvalidArgument("integrate_switched: empty schedule");
  check_network_start(spec, sched.graphs.front(), x0);

  NetworkState work = x0;
  const DirectedGraph* active = nullptr;
  FieldFn field = [&](double t, std::span<const double> x, std::span<double> dx) {
    work.time = t;
    std::copy(x.begin(), x.end(), work.states.begin());
    coupled_field(spec, *active, cfg, work, dx);
  };

  std::vector<double> next(x0.states.size());
  return run_fixed_step(x0.num_agents, x0.dim, x0, dt, horizon,
                        [&](int, double t, std::vector<double>& x) {
                          active = &sched.graph_at(t);
                          rk4_step(field, t, x, dt, next);
                          x.swap(next);
                          return true;
                        });
}

Trajectory integrate_agent(const SystemSpec& spec, std::span<const double> x0, double dt,
                           double horizon) {
  if (static_cast<int>(x0.size()) != spec.dim)
    throw InvalidArgument("integrate_agent: initial state dim mismatch");

  FieldFn field = [&](double, std::span<const double> x, std::span<double> dx) {
    eval_vector_field(spec, x, dx);
  };

  NetworkState start(1, spec.dim);
  std::copy(x0.begin(), x0.end(), start.states.begin());
  std::vector<double> next(x0.size());
  return run_fixed_step(1, spec.dim, start, dt, horizon,
                        [&](int, double t, std::vector<double>& x) {
                          rk4_step(field, t, x, dt, next);
                          x.swap(next);
                          return true;
                        });
}

}  // namespace chaosnet
