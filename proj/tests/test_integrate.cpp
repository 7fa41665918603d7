#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "chaosnet/errors.hpp"
#include "chaosnet/integrate.hpp"
#include "test_support.hpp"

using namespace chaosnet;

namespace {

NetworkState perturbed_start(const SystemSpec& spec, int agents, uint64_t seed, double radius = 0.5) {
  Rng rng(seed);
  NetworkState x0(agents, spec.dim);
  for (int i = 0; i < agents; ++i) {
    auto xi = x0.agent(i);
    for (int d = 0; d < spec.dim; ++d)
      xi[d] = 1.0 + (i == 0 ? 0.0 : rng.uniform(-radius, radius));
  }
  return x0;
}

NetworkState identical_start(const SystemSpec& spec, int agents) {
  NetworkState x0(agents, spec.dim);
  for (int i = 0; i < agents; ++i) {
    auto xi = x0.agent(i);
    for (int d = 0; d < spec.dim; ++d) xi[d] = 1.0;
  }
  return x0;
}

double max_sync_error(const Trajectory& traj) {
  double worst = 0.0;
  for (size_t k = 0; k < traj.samples(); ++k) {
    auto leader = traj.agent_state(k, 0);
    for (int i = 1; i < traj.num_agents; ++i) {
      auto xi = traj.agent_state(k, i);
      for (int d = 0; d < traj.dim; ++d) worst = std::max(worst, std::abs(xi[d] - leader[d]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("rk4 on exponential decay") {
  FieldFn decay = [](double, std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
  std::vector<double> x{1.0}, next{0.0};
  for (int k = 0; k < 10; ++k) {
    rk4_step(decay, k * 0.1, x, 0.1, next);
    x = next;
  }
  CHECK(std::abs(x[0] - 0.36787944117144233) < 1e-6);  // e^{-1}
}

TEST_CASE("rk4 leaves the state unchanged under a zero field") {
  FieldFn zero = [](double, std::span<const double>, std::span<double> dx) {
    for (double& v : dx) v = 0.0;
  };
  std::vector<double> x{3.0, -2.0, 0.5}, next(3);
  rk4_step(zero, 0.0, x, 0.1, next);
  CHECK(next == x);
}

TEST_CASE("rk4 empirical order on the Lu leader") {
  // global error at t = 1 against a dt = 1e-5 reference, then halve dt
  SystemSpec spec = builtin_system("lu");
  std::vector<double> x0{1.0, 1.0, 1.0};

  auto final_state = [&](double dt) {
    Trajectory t = integrate_agent(spec, x0, dt, 1.0);
    auto s = t.agent_state(t.samples() - 1, 0);
    return std::vector<double>(s.begin(), s.end());
  };

  auto ref = final_state(1e-5);
  auto err_of = [&](double dt) {
    auto s = final_state(dt);
    double e = 0.0;
    for (int k = 0; k < 3; ++k) e = std::max(e, std::abs(s[k] - ref[k]));
    return e;
  };

  double e1 = err_of(2e-3);
  double e2 = err_of(1e-3);
  double order = std::log2(e1 / e2);
  CHECK(order >= 3.7);
  CHECK(order <= 4.6);
}

TEST_CASE("divergence carries the failure time") {
  FieldFn blowup = [](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[0] * x[0];  // finite-time escape
  };
  std::vector<double> x{1.0}, next{0.0};
  double t = 0.0;
  bool threw = false;
  try {
    for (int k = 0; k < 20000; ++k) {
      rk4_step(blowup, t, x, 1e-3, next);
      x = next;
      t += 1e-3;
    }
  } catch (const DivergenceError& e) {
    threw = true;
    CHECK(e.time() == doctest::Approx(1.0).epsilon(0.05));  // 1/x0 blowup time
  }
  CHECK(threw);
}

TEST_CASE("manifold invariance: identical states stay identical") {
  for (const char* name : {"lu", "rossler", "chen"}) {
    SystemSpec spec = builtin_system(name);
    DirectedGraph g = chain_topology(4);
    CouplingConfig cfg;
    cfg.alpha = 0.95;

    Trajectory traj = integrate_ode(spec, g, cfg, identical_start(spec, 4), 1e-3, 10.0);
    REQUIRE_FALSE(traj.diverged);
    CHECK(max_sync_error(traj) <= 1e-9);
  }
}

TEST_CASE("manifold invariance holds under delay") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(4);
  CouplingConfig cfg;
  cfg.alpha = 0.95;
  cfg.delay = 0.1;

  Trajectory traj = integrate_dde(spec, g, cfg, identical_start(spec, 4), 1e-3, 10.0);
  REQUIRE_FALSE(traj.diverged);
  CHECK(max_sync_error(traj) <= 1e-9);
}

TEST_CASE("decoupled followers match an independently integrated single agent bitwise") {
  SystemSpec spec = builtin_system("rossler");
  Matrix a(3, 3);  // no edges at all
  DirectedGraph g = make_graph(3, a);
  CouplingConfig cfg;
  cfg.alpha = 1.0;

  NetworkState x0 = perturbed_start(spec, 3, 5);
  Trajectory network = integrate_ode(spec, g, cfg, x0, 1e-3, 5.0);

  for (int i = 0; i < 3; ++i) {
    auto xi0 = x0.agent(i);
    Trajectory solo = integrate_agent(spec, xi0, 1e-3, 5.0);
    for (size_t k = 0; k < network.samples(); ++k) {
      auto want = solo.agent_state(k, 0);
      auto got = network.agent_state(k, i);
      for (int d = 0; d < 3; ++d) CHECK(got[d] == want[d]);
    }
  }
}

TEST_CASE("integration is reproducible bit for bit") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(5);
  CouplingConfig cfg;
  cfg.alpha = 0.95;
  NetworkState x0 = perturbed_start(spec, 5, 11);

  Trajectory t1 = integrate_ode(spec, g, cfg, x0, 1e-3, 3.0);
  Trajectory t2 = integrate_ode(spec, g, cfg, x0, 1e-3, 3.0);
  CHECK(t1.data == t2.data);
  CHECK(t1.times == t2.times);
}

TEST_CASE("single Lu agent stays on the attractor") {
  SystemSpec spec = builtin_system("lu");
  Trajectory traj = integrate_agent(spec, std::vector<double>{1, 1, 1}, 1e-3, 50.0);
  REQUIRE_FALSE(traj.diverged);
  double worst = 0.0;
  for (double v : traj.data) worst = std::max(worst, std::abs(v));
  CHECK(worst < 60.0);
  CHECK(worst > 5.0);  // it moved
}

TEST_CASE("trajectory sampling is uniform") {
  SystemSpec spec = builtin_system("lu");
  Trajectory traj = integrate_agent(spec, std::vector<double>{1, 1, 1}, 1e-3, 1.0);
  REQUIRE(traj.samples() == 1001);
  for (size_t k = 1; k < traj.samples(); ++k)
    CHECK(std::abs(traj.times[k] - traj.times[k - 1] - 1e-3) <= 1e-12);
}

TEST_CASE("history buffer") {
  std::vector<double> init{1.0, 2.0};
  HistoryBuffer buf(0.5, 0.1, init);
  buf.push(0.1, std::vector<double>{2.0, 3.0});
  buf.push(0.2, std::vector<double>{3.0, 4.0});

  std::vector<double> out(2);

  SUBCASE("constant pre-history before t = 0") {
    buf.lookup(-5.0, out);
    CHECK(out == init);
    buf.lookup(0.0, out);
    CHECK(out == init);
  }

  SUBCASE("linear interpolation between samples") {
    buf.lookup(0.15, out);
    CHECK(out[0] == doctest::Approx(2.5));
    CHECK(out[1] == doctest::Approx(3.5));
  }

  SUBCASE("exact sample hits") {
    buf.lookup(0.1, out);
    CHECK(out[0] == 2.0);
    buf.lookup(0.2, out);
    CHECK(out[0] == 3.0);
  }

  SUBCASE("extrapolation past the newest sample") {
    buf.lookup(0.25, out);  // continues the last segment's slope
    CHECK(out[0] == doctest::Approx(3.5));
    CHECK(out[1] == doctest::Approx(4.5));
  }

  SUBCASE("rejects shape mismatch and stale lookups") {
    std::vector<double> bad(3);
    CHECK_THROWS_AS(buf.lookup(0.1, bad), InvalidArgument);
    CHECK_THROWS_AS(buf.push(0.2, std::vector<double>{1.0, 1.0}), InvalidState);
  }

  SUBCASE("old samples fall out of the window") {
    HistoryBuffer ring(0.3, 0.1, init);
    for (int k = 1; k <= 100; ++k)
      ring.push(0.1 * k, std::vector<double>{static_cast<double>(k), 0.0});
    CHECK(ring.oldest_time() >= 9.3);             // pruned
    CHECK(ring.oldest_time() <= 10.0 - 0.3);      // still covers the delay window
    CHECK_THROWS_AS(ring.lookup(5.0, out), InvalidState);
    ring.lookup(9.95, out);
    CHECK(out[0] == doctest::Approx(99.5));
  }
}

TEST_CASE("dde with forced current history reproduces the ode path") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  cfg.alpha = 0.95;
  NetworkState x0 = perturbed_start(spec, 3, 17);

  CouplingConfig undelayed = cfg;
  Trajectory ode = integrate_ode(spec, g, undelayed, x0, 1e-3, 2.0);

  cfg.delay = 0.25;
  DdeOptions opts;
  opts.force_current_history = true;
  Trajectory dde = integrate_dde(spec, g, cfg, x0, 1e-3, 2.0, opts);

  REQUIRE(ode.samples() == dde.samples());
  double worst = 0.0;
  for (size_t k = 0; k < ode.data.size(); ++k)
    worst = std::max(worst, std::abs(ode.data[k] - dde.data[k]));
  CHECK(worst <= 1e-10);
}

TEST_CASE("dde accepts delays smaller than the step") {
  SystemSpec spec = builtin_system("rossler");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  cfg.alpha = 1.2;
  cfg.delay = 4e-4;  // below dt = 1e-3, off the sample grid

  Trajectory traj = integrate_dde(spec, g, cfg, perturbed_start(spec, 3, 23), 1e-3, 2.0);
  CHECK_FALSE(traj.diverged);
  CHECK(traj.samples() == 2001);
}

TEST_CASE("dde accepts delays off the step grid") {
  SystemSpec spec = builtin_system("rossler");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  cfg.alpha = 1.2;
  cfg.delay = 0.0503;  // not an integer multiple of dt

  Trajectory traj = integrate_dde(spec, g, cfg, perturbed_start(spec, 3, 29), 1e-3, 2.0);
  CHECK_FALSE(traj.diverged);
}

TEST_CASE("sde with zero noise equals the explicit Euler path exactly") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  cfg.alpha = 0.95;
  NetworkState x0 = perturbed_start(spec, 3, 31);

  Trajectory sde = integrate_sde(spec, g, cfg, x0, 1e-4, 1.0, 999);

  // hand-rolled Euler reference over the same field
  NetworkState work = x0;
  FieldFn field = [&](double t, std::span<const double> x, std::span<double> dx) {
    work.time = t;
    std::copy(x.begin(), x.end(), work.states.begin());
    coupled_field(spec, g, cfg, work, dx);
  };
  std::vector<double> x = x0.states, next(x.size());
  size_t k = 0;
  for (; k < sde.samples() - 1; ++k) {
    auto got = sde.state(k);
    for (size_t d = 0; d < x.size(); ++d) REQUIRE(got[d] == x[d]);
    euler_step(field, k * 1e-4, x, 1e-4, next);
    x.swap(next);
  }
  auto last = sde.state(k);
  for (size_t d = 0; d < x.size(); ++d) CHECK(last[d] == x[d]);
}

TEST_CASE("sde paths are seed-deterministic and seed-sensitive") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  cfg.alpha = 0.95;
  cfg.noise_variance = 0.01;
  NetworkState x0 = perturbed_start(spec, 3, 37);

  Trajectory a = integrate_sde(spec, g, cfg, x0, 1e-4, 0.5, 4242);
  Trajectory b = integrate_sde(spec, g, cfg, x0, 1e-4, 0.5, 4242);
  Trajectory c = integrate_sde(spec, g, cfg, x0, 1e-4, 0.5, 4243);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
}

TEST_CASE("switched integration follows the schedule") {
  SystemSpec spec = builtin_system("lu");
  std::vector<DirectedGraph> graphs{chain_topology(4)};
  SwitchingSchedule sched = sample_switching_schedule(graphs, 0.5, 5.0, 3);
  CouplingConfig cfg;
  cfg.alpha = 0.95;

  // single graph: switched result must equal the plain ode path bitwise
  NetworkState x0 = perturbed_start(spec, 4, 41);
  Trajectory sw = integrate_switched(spec, sched, cfg, x0, 1e-3, 5.0);
  Trajectory ode = integrate_ode(spec, graphs[0], cfg, x0, 1e-3, 5.0);
  CHECK(sw.data == ode.data);
}

TEST_CASE("integrators validate their preconditions") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  NetworkState x0(3, 3);

  CHECK_THROWS_AS(integrate_ode(spec, g, cfg, x0, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(integrate_ode(spec, g, cfg, x0, 1e-3, -1.0), InvalidArgument);
  CHECK_THROWS_AS(integrate_dde(spec, g, cfg, x0, 1e-3, 1.0), InvalidArgument);  // delay = 0

  cfg.delay = 0.5;
  CHECK_THROWS_AS(integrate_ode(spec, g, cfg, x0, 1e-3, 1.0), InvalidArgument);
  cfg.delay = 0.0;
  cfg.noise_variance = 0.1;
  CHECK_THROWS_AS(integrate_ode(spec, g, cfg, x0, 1e-3, 1.0), InvalidArgument);
}

TEST_CASE("chaotic divergence is reported, not thrown") {
  // alpha = 1 cancels the nonlinearity for the first follower: its error obeys
  // e' = L e with an unstable linear part, so the state runs away and the
  // integrator truncates cleanly.
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(2);
  CouplingConfig cfg;
  cfg.alpha = 1.0;

  NetworkState x0 = perturbed_start(spec, 2, 43, 0.5);
  Trajectory traj = integrate_ode(spec, g, cfg, x0, 1e-3, 10.0);
  CHECK(traj.diverged);
  CHECK(traj.divergence_time > 0.0);
  CHECK(traj.divergence_time < 10.0);
  CHECK(traj.samples() >= 1);
}
