#include "chaosnet/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaosnet/errors.hpp"
#include "chaosnet/parallel.hpp"

namespace chaosnet {

namespace {

void require_square(const Matrix& a, const char* who) {
  if (!a.square()) throw InvalidArgument(std::string(who) + ": matrix must be square");
}

void require_spd(const Matrix& m, const char* name) {
  if (!is_positive_definite(m))
    throw InvalidArgument(std::string(name) + " must be symmetric positive definite");
}

// Worst case of fn over the sample set; fn must be pure. Max-reduction is
// order-independent, so parallel and serial scans agree exactly.
template <bool Parallel, typename Fn>
CheckResult scan_samples(std::span<const std::vector<double>> states, Fn&& fn) {
  if (states.empty()) throw InvalidArgument("certificate check: empty sample set");
  const int n = static_cast<int>(states.size());
  double worst = -std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : worst) \
    if (Parallel && n >= parallel::kMinParallelWork)
#endif
  for (int k = 0; k < n; ++k) worst = std::max(worst, fn(states[k]));
  return CheckResult{worst, worst < 0.0, n};
}

double theorem2_value(const SystemSpec& spec, double alpha, Norm p, double mu_l,
                      std::span<const double> x) {
  Matrix jg = jacobian_nonlinear(spec, x);
  return mu_l + (1.0 - alpha) * matrix_measure(jg, p);
}

double quadratic_form_margin(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                             const Matrix& shift, std::span<const double> x) {
  Matrix m = spec.linear_part + (1.0 - alpha) * jacobian_nonlinear(spec, x);
  Matrix s = m.transpose() * p_mat + p_mat * m + shift;
  return symmetric_lambda_max(symmetric_part(s));
}

template <bool Parallel>
CheckResult theorem2_impl(const SystemSpec& spec, double alpha, Norm p,
                          std::span<const std::vector<double>> states) {
  double mu_l = matrix_measure(spec.linear_part, p);
  return scan_samples<Parallel>(states, [&](const std::vector<double>& x) {
    return theorem2_value(spec, alpha, p, mu_l, x);
  });
}

template <bool Parallel>
CheckResult eq9_impl(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                     const Matrix& q_mat, std::span<const std::vector<double>> states) {
  require_spd(p_mat, "eq9_check: P");
  require_spd(q_mat, "eq9_check: Q");
  CheckResult r = scan_samples<Parallel>(states, [&](const std::vector<double>& x) {
    return quadratic_form_margin(spec, alpha, p_mat, q_mat, x);
  });
  r.ok = r.margin <= 0.0;
  return r;
}

template <bool Parallel>
CheckResult krasovskii_impl(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                            const Matrix& r_mat, double tau,
                            std::span<const std::vector<double>> states) {
  require_spd(p_mat, "krasovskii_check: P");
  require_spd(r_mat, "krasovskii_check: R");
  if (tau < 0.0) throw InvalidArgument("krasovskii_check: tau must be >= 0");
  Matrix shift = tau * r_mat;
  return scan_samples<Parallel>(states, [&](const std::vector<double>& x) {
    return quadratic_form_margin(spec, alpha, p_mat, shift, x);
  });
}

}  // namespace

double matrix_measure(const Matrix& a, Norm p) {
  require_square(a, "matrix_measure");
  const int n = a.rows();
  switch (p) {
    case Norm::one: {
      double best = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        double s = a(j, j);
        for (int i = 0; i < n; ++i)
          if (i != j) s += std::abs(a(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case Norm::inf: {
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        double s = a(i, i);
        for (int j = 0; j < n; ++j)
          if (j != i) s += std::abs(a(i, j));
        best = std::max(best, s);
      }
      return best;
    }
    case Norm::two:
      return symmetric_lambda_max(symmetric_part(a));
  }
  throw InvalidArgument("matrix_measure: unknown norm");
}

CheckResult theorem2_check(const SystemSpec& spec, double alpha, Norm p,
                           std::span<const std::vector<double>> states) {
  return theorem2_impl<true>(spec, alpha, p, states);
}
CheckResult theorem2_check_serial(const SystemSpec& spec, double alpha, Norm p,
                                  std::span<const std::vector<double>> states) {
  return theorem2_impl<false>(spec, alpha, p, states);
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  require_square(a, "solve_lyapunov");
  require_spd(q, "solve_lyapunov: Q");
  const int n = a.rows();
  if (q.rows() != n) throw InvalidArgument("solve_lyapunov: Q size mismatch");

  // vec-form of P -> A^T P + P A: coefficient of P_kl in row (i, j) is
  // A_ki delta_jl + A_lj delta_ik.
  Matrix big(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int row = i * n + j;
      for (int k = 0; k < n; ++k) big(row, k * n + j) += a(k, i);
      for (int l = 0; l < n; ++l) big(row, i * n + l) += a(l, j);
    }

  std::vector<double> rhs(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rhs[static_cast<size_t>(i) * n + j] = -q(i, j);

  LuFactors f = lu_factor(std::move(big));
  if (f.singular)
    throw NumericalError("solve_lyapunov: singular operator (eigenvalues of A sum to zero)");
  std::vector<double> vec = lu_solve(f, rhs);

  Matrix p(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = vec[static_cast<size_t>(i) * n + j];
  return symmetric_part(p);  // symmetrize away round-off
}

CheckResult eq9_check(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                      const Matrix& q_mat, std::span<const std::vector<double>> states) {
  return eq9_impl<true>(spec, alpha, p_mat, q_mat, states);
}
CheckResult eq9_check_serial(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                             const Matrix& q_mat, std::span<const std::vector<double>> states) {
  return eq9_impl<false>(spec, alpha, p_mat, q_mat, states);
}

CheckResult krasovskii_check(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                             const Matrix& r_mat, double tau,
                             std::span<const std::vector<double>> states) {
  return krasovskii_impl<true>(spec, alpha, p_mat, r_mat, tau, states);
}
CheckResult krasovskii_check_serial(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                                    const Matrix& r_mat, double tau,
                                    std::span<const std::vector<double>> states) {
  return krasovskii_impl<false>(spec, alpha, p_mat, r_mat, tau, states);
}

Matrix extended_jacobian(const SystemSpec& spec, const DirectedGraph& g, double alpha,
                         const NetworkState& x) {
  if (x.dim != spec.dim || x.num_agents != g.num_agents)
    throw InvalidArgument("extended_jacobian: shape mismatch");
  const int n = spec.dim;
  const int followers = g.num_agents - 1;
  Matrix jext(followers * n, followers * n);

  std::vector<Matrix> jg(g.num_agents);
  for (int i = 0; i < g.num_agents; ++i) jg[i] = jacobian_nonlinear(spec, x.agent(i));

  for (int fi = 0; fi < followers; ++fi) {
    int i = fi + 1;
    double coeff = (1.0 - alpha) - alpha * g.in_weight(i);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        jext(fi * n + r, fi * n + c) = spec.linear_part(r, c) + coeff * jg[i](r, c);

    for (int fj = 0; fj < followers; ++fj) {
      int j = fj + 1;
      double w = g.adjacency(i, j);
      if (w == 0.0 || j == i) continue;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          jext(fi * n + r, fj * n + c) = alpha * w * jg[j](r, c);
    }
  }
  return jext;
}

std::vector<double> follower_error_field(const SystemSpec& spec, const DirectedGraph& g,
                                         double alpha, std::span<const double> leader_state,
                                         std::span<const double> errors) {
  const int n = spec.dim;
  const int followers = g.num_agents - 1;
  if (static_cast<int>(leader_state.size()) != n ||
      static_cast<int>(errors.size()) != followers * n)
    throw InvalidArgument("follower_error_field: shape mismatch");

  std::vector<double> g_leader(n);
  spec.nonlinear(leader_state, g_leader);

  // G(x_1 + e_i) per agent, with the leader entry itself (e = 0)
  std::vector<double> g_at(static_cast<size_t>(g.num_agents) * n);
  std::copy(g_leader.begin(), g_leader.end(), g_at.begin());
  std::vector<double> xi(n);
  for (int fi = 0; fi < followers; ++fi) {
    for (int k = 0; k < n; ++k) xi[k] = leader_state[k] + errors[static_cast<size_t>(fi) * n + k];
    spec.nonlinear(xi, {g_at.data() + static_cast<size_t>(fi + 1) * n, static_cast<size_t>(n)});
  }

  std::vector<double> out(errors.size());
  for (int fi = 0; fi < followers; ++fi) {
    int i = fi + 1;
    std::span<const double> ei = errors.subspan(static_cast<size_t>(fi) * n, n);
    std::span<double> dei{out.data() + static_cast<size_t>(fi) * n, static_cast<size_t>(n)};
    spec.linear_part.apply(ei, dei);
    const double* gi = g_at.data() + static_cast<size_t>(i) * n;
    for (int k = 0; k < n; ++k) dei[k] += (1.0 - alpha) * (gi[k] - g_leader[k]);
    for (int j = 0; j < g.num_agents; ++j) {
      double w = g.adjacency(i, j);
      if (w == 0.0) continue;
      const double* gj = g_at.data() + static_cast<size_t>(j) * n;
      for (int k = 0; k < n; ++k) dei[k] += alpha * w * (gj[k] - gi[k]);
    }
  }
  return out;
}

double spectral_abscissa(const Matrix& a) {
  require_square(a, "spectral_abscissa");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues(a)) best = std::max(best, ev.real());
  return best;
}

std::vector<std::vector<double>> sample_attractor_states(const SystemSpec& spec,
                                                         std::span<const double> x0,
                                                         double transient, double horizon,
                                                         int count, double dt) {
  if (count < 1) throw InvalidArgument("sample_attractor_states: count must be >= 1");
  Trajectory traj = integrate_agent(spec, x0, dt, transient + horizon);
  if (traj.diverged)
    throw DivergenceError(traj.divergence_time, "attractor sampling diverged for system " + spec.name);

  size_t first = static_cast<size_t>(std::llround(transient / dt));
  size_t last = traj.samples() - 1;
  std::vector<std::vector<double>> samples;
  samples.reserve(count);
  for (int k = 0; k < count; ++k) {
    size_t idx = count == 1 ? last : first + (last - first) * k / (count - 1);
    auto s = traj.agent_state(idx, 0);
    samples.emplace_back(s.begin(), s.end());
  }
  return samples;
}

namespace {

template <bool Parallel>
double max_abscissa_impl(const SystemSpec& spec, const DirectedGraph& g, double alpha,
                         const Trajectory& traj, size_t stride) {
  if (stride == 0) throw InvalidArgument("max_extended_spectral_abscissa: stride must be > 0");
  if (traj.samples() == 0) throw InvalidArgument("max_extended_spectral_abscissa: empty trajectory");
  std::vector<size_t> picks;
  for (size_t k = 0; k < traj.samples(); k += stride) picks.push_back(k);

  const int n = static_cast<int>(picks.size());
  double worst = -std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(max : worst) \
    if (Parallel && n >= parallel::kMinParallelWork)
#endif
  for (int k = 0; k < n; ++k) {
    NetworkState x = traj.network_state(picks[k]);
    worst = std::max(worst, spectral_abscissa(extended_jacobian(spec, g, alpha, x)));
  }
  return worst;
}

}  // namespace

double max_extended_spectral_abscissa(const SystemSpec& spec, const DirectedGraph& g, double alpha,
                                      const Trajectory& traj, size_t stride) {
  return max_abscissa_impl<true>(spec, g, alpha, traj, stride);
}
double max_extended_spectral_abscissa_serial(const SystemSpec& spec, const DirectedGraph& g,
                                             double alpha, const Trajectory& traj, size_t stride) {
  return max_abscissa_impl<false>(spec, g, alpha, traj, stride);
}

CertificateReport certify(const SystemSpec& spec, const DirectedGraph& g, double alpha,
                          std::span<const double> leader_x0, const CertifyOptions& opts) {
  auto samples = sample_attractor_states(spec, leader_x0, opts.transient, opts.sample_horizon,
                                         opts.sample_count, opts.dt);

  CertificateReport report;
  report.samples_used = static_cast<int>(samples.size());

  CheckResult t2 = theorem2_check(spec, alpha, opts.p, samples);
  report.theorem2_margin = t2.margin;
  report.theorem2_ok = t2.ok;

  Matrix p_mat = Matrix::identity(spec.dim);
  Matrix q_mat = 1e-6 * Matrix::identity(spec.dim);
  CheckResult e9 = eq9_check(spec, alpha, p_mat, q_mat, samples);
  report.eq9_margin = e9.margin;
  report.eq9_ok = e9.ok;

  Matrix r_mat = Matrix::identity(spec.dim);
  CheckResult kr = krasovskii_check(spec, alpha, p_mat, r_mat, opts.tau, samples);
  report.krasovskii_margin = kr.margin;
  report.krasovskii_ok = kr.ok;

  // extended Jacobian at synchronized network states drawn from the samples
  int count = std::min<int>(opts.jext_samples, static_cast<int>(samples.size()));
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    const auto& s = samples[samples.size() * k / count];
    NetworkState x(g.num_agents, spec.dim);
    for (int i = 0; i < g.num_agents; ++i)
      std::copy(s.begin(), s.end(), x.agent(i).begin());
    worst = std::max(worst, spectral_abscissa(extended_jacobian(spec, g, alpha, x)));
  }
  report.spectral_abscissa = worst;
  report.spectral_ok = worst < 0.0;
  return report;
}

}  // namespace chaosnet
