#pragma once

#include <span>
#include <vector>

#include "chaosnet/integrate.hpp"
#include "chaosnet/linalg.hpp"
#include "chaosnet/network.hpp"
#include "chaosnet/systems.hpp"
#include "chaosnet/topology.hpp"

namespace chaosnet {

enum class Norm { one, two, inf };

// Logarithmic norm (matrix measure) mu_p:
//   mu_1   = max_j ( a_jj + sum_{i!=j} |a_ij| )   (column formula)
//   mu_2   = lambda_max( (A + A^T) / 2 )
//   mu_inf = max_i ( a_ii + sum_{j!=i} |a_ij| )   (row formula)
double matrix_measure(const Matrix& a, Norm p);

struct CheckResult {
  double margin = 0.0;
  bool ok = false;
  int samples_used = 0;
};

// Worst case over the sampled states of mu_p(L) + (1 - alpha) * mu_p(J_G(x)).
// Certifies phase synchronization when the margin is negative.
CheckResult theorem2_check(const SystemSpec& spec, double alpha, Norm p,
                           std::span<const std::vector<double>> states);
CheckResult theorem2_check_serial(const SystemSpec& spec, double alpha, Norm p,
                                  std::span<const std::vector<double>> states);

// Symmetric P solving A^T P + P A = -Q via the vectorized Kronecker system.
// Requires that no two eigenvalues of A sum to zero; P is positive definite
// when A is Hurwitz.
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

// Worst case over samples of lambda_max( M(x)^T P + P M(x) + Q ) with
// M(x) = L + (1 - alpha) J_G(x); non-positive margin certifies the quadratic
// Lyapunov decay condition.
CheckResult eq9_check(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                      const Matrix& q_mat, std::span<const std::vector<double>> states);
CheckResult eq9_check_serial(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                             const Matrix& q_mat, std::span<const std::vector<double>> states);

// Delay variant: lambda_max( M^T P + P M + tau R ) < 0 over samples
// (Krasovskii functional with a tau-weighted integral term).
CheckResult krasovskii_check(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                             const Matrix& r_mat, double tau,
                             std::span<const std::vector<double>> states);
CheckResult krasovskii_check_serial(const SystemSpec& spec, double alpha, const Matrix& p_mat,
                                    const Matrix& r_mat, double tau,
                                    std::span<const std::vector<double>> states);

// Block Jacobian of the stacked follower error dynamics in their linearized
// form: for followers i, j (j != i),
//   block(i,i) = L + ((1 - alpha) - alpha * d_i) * J_G(x_i),  d_i = sum_j a_ij
//   block(i,j) = alpha * a_ij * J_G(x_j)  for follower neighbors j
// Size (N-1)n x (N-1)n.
Matrix extended_jacobian(const SystemSpec& spec, const DirectedGraph& g, double alpha,
                         const NetworkState& x);

// The error field whose exact Jacobian extended_jacobian is: stacked
//   L e_i + (1 - alpha) (G(x_1 + e_i) - G(x_1))
//       + alpha * sum_j a_ij (G(x_1 + e_j) - G(x_1 + e_i)),   e_leader = 0.
// errors is stacked follower errors (e_2, ..., e_N); returns the stacked
// derivative in the same layout.
std::vector<double> follower_error_field(const SystemSpec& spec, const DirectedGraph& g,
                                         double alpha, std::span<const double> leader_state,
                                         std::span<const double> errors);

// Max real part of the full spectrum (dense nonsymmetric eigenvalue path).
double spectral_abscissa(const Matrix& a);

// Subsample the leader's attractor: integrate one agent for transient +
// horizon seconds and keep `count` evenly spaced post-transient states.
std::vector<std::vector<double>> sample_attractor_states(const SystemSpec& spec,
                                                         std::span<const double> x0,
                                                         double transient, double horizon,
                                                         int count, double dt = 1e-3);

// Max spectral abscissa of the extended Jacobian over trajectory samples
// taken every `stride` steps. OpenMP-parallel across samples.
double max_extended_spectral_abscissa(const SystemSpec& spec, const DirectedGraph& g, double alpha,
                                      const Trajectory& traj, size_t stride);
double max_extended_spectral_abscissa_serial(const SystemSpec& spec, const DirectedGraph& g,
                                             double alpha, const Trajectory& traj, size_t stride);

// Margins for every certificate at one coupling gain. Verdicts are true iff
// the corresponding margin is negative (eq9: non-positive).
struct CertificateReport {
  double theorem2_margin = 0.0;
  double eq9_margin = 0.0;
  double krasovskii_margin = 0.0;
  double spectral_abscissa = 0.0;  // of J_ext at the synchronized sample states
  int samples_used = 0;
  bool theorem2_ok = false;
  bool eq9_ok = false;
  bool krasovskii_ok = false;
  bool spectral_ok = false;
};

struct CertifyOptions {
  Norm p = Norm::two;
  double tau = 0.0;          // 0: krasovskii margin computed at tau -> 0 (equals eq9 with Q -> 0)
  double transient = 20.0;   // attractor sampling
  double sample_horizon = 100.0;
  int sample_count = 500;
  int jext_samples = 100;    // synchronized states used for the spectral abscissa
  double dt = 1e-3;
};

// The certification pipeline: sample the leader attractor, run the Theorem 2 /
// Lyapunov / Krasovskii checks (P = I, Q = 1e-6 I, R = I defaults), and take
// the extended-Jacobian spectral abscissa over synchronized network states.
CertificateReport certify(const SystemSpec& spec, const DirectedGraph& g, double alpha,
                          std::span<const double> leader_x0, const CertifyOptions& opts = {});

}  // namespace chaosnet
