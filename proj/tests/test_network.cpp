#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "chaosnet/errors.hpp"
#include "chaosnet/network.hpp"
#include "test_support.hpp"

using namespace chaosnet;

namespace {

NetworkState state_of(int agents, std::initializer_list<double> flat) {
  NetworkState x(agents, 3);
  int k = 0;
  for (double v : flat) x.states[k++] = v;
  return x;
}

HistoryFn constant_history(std::vector<double> value) {
  return [value = std::move(value)](double, std::span<double> out) {
    std::copy(value.begin(), value.end(), out.begin());
  };
}

}  // namespace

TEST_CASE("coupling vanishes at identical states") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  cfg.alpha = 1.7;

  NetworkState x = state_of(3, {2, -1, 4, 2, -1, 4, 2, -1, 4});
  std::vector<double> dx(9);
  coupled_field(spec, g, cfg, x, dx);

  auto f = eval_vector_field(spec, std::vector<double>{2, -1, 4});
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) CHECK(dx[i * 3 + k] == f[k]);  // exact, not approximate
}

TEST_CASE("alpha = 0 decouples the agents") {
  SystemSpec spec = builtin_system("rossler");
  DirectedGraph g = chain_topology(2);
  CouplingConfig cfg;
  cfg.alpha = 0.0;  // boundary case: outside the alpha > 0 model class

  NetworkState x = state_of(2, {1, 2, 3, -4, 5, -6});
  std::vector<double> dx(6);
  coupled_field(spec, g, cfg, x, dx);

  auto f0 = eval_vector_field(spec, x.agent(0));
  auto f1 = eval_vector_field(spec, x.agent(1));
  for (int k = 0; k < 3; ++k) {
    CHECK(dx[k] == f0[k]);
    CHECK(dx[3 + k] == f1[k]);
  }
}

TEST_CASE("two-agent chain hand value") {
  // follower at the origin, leader at (1,1,1), alpha = 1:
  // L*0 + G(0) + 1*(G(x1) - G(0)) = (0, -1, 1) for the Lu system
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(2);
  CouplingConfig cfg;
  cfg.alpha = 1.0;

  NetworkState x = state_of(2, {1, 1, 1, 0, 0, 0});
  std::vector<double> dx(6);
  coupled_field(spec, g, cfg, x, dx);
  CHECK(dx[3] == doctest::Approx(0.0));
  CHECK(dx[4] == doctest::Approx(-1.0));
  CHECK(dx[5] == doctest::Approx(1.0));
}

TEST_CASE("serial and parallel field kernels agree bitwise") {
  SystemSpec spec = builtin_system("chen");
  DirectedGraph g = chain_topology(40);
  CouplingConfig cfg;
  cfg.alpha = 0.9;
  cfg.heterogeneity = 0.05;
  cfg.hetero_directions = heterogeneity_directions(40, 3, 5);

  Rng rng(8);
  NetworkState x(40, 3);
  for (double& v : x.states) v = rng.uniform(-30, 30);

  std::vector<double> a(x.states.size()), b(x.states.size());
  coupled_field(spec, g, cfg, x, a);
  coupled_field_serial(spec, g, cfg, x, b);
  CHECK(a == b);
}

TEST_CASE("heterogeneity adds a term of norm exactly epsilon") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(4);
  Rng rng(21);
  NetworkState x(4, 3);
  for (double& v : x.states) v = rng.uniform(-10, 10);

  CouplingConfig base;
  base.alpha = 0.8;
  std::vector<double> plain(x.states.size());
  coupled_field(spec, g, base, x, plain);

  CouplingConfig hetero = base;
  hetero.heterogeneity = 0.25;
  hetero.hetero_directions = heterogeneity_directions(4, 3, 77);
  std::vector<double> shifted(x.states.size());
  coupled_field(spec, g, hetero, x, shifted);

  for (int k = 0; k < 3; ++k) CHECK(shifted[k] == plain[k]);  // leader untouched
  for (int i = 1; i < 4; ++i) {
    double norm = 0.0;
    for (int k = 0; k < 3; ++k) {
      double d = shifted[i * 3 + k] - plain[i * 3 + k];
      norm += d * d;
    }
    CHECK(std::sqrt(norm) == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("heterogeneity directions are unit vectors and seeded") {
  auto d1 = heterogeneity_directions(6, 3, 123);
  auto d2 = heterogeneity_directions(6, 3, 123);
  CHECK(d1 == d2);
  for (int i = 1; i < 6; ++i) {
    double norm = 0.0;
    for (double v : d1[i]) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }
  double leader_norm = 0.0;
  for (double v : d1[0]) leader_norm += v * v;
  CHECK(leader_norm == 0.0);
}

TEST_CASE("coupling config validation") {
  CouplingConfig cfg;
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(validate_coupling(cfg, 3, 3), InvalidArgument);
  cfg.alpha = 1.0;
  cfg.delay = -0.5;
  CHECK_THROWS_AS(validate_coupling(cfg, 3, 3), InvalidArgument);
  cfg.delay = 0.0;
  cfg.noise_variance = -1e-6;
  CHECK_THROWS_AS(validate_coupling(cfg, 3, 3), InvalidArgument);
  cfg.noise_variance = 0.0;
  cfg.heterogeneity = 0.1;  // no directions supplied
  CHECK_THROWS_AS(validate_coupling(cfg, 3, 3), InvalidArgument);
  cfg.hetero_directions = {{0, 0, 0}, {1, 1, 0}, {1, 0, 0}};  // not unit
  CHECK_THROWS_AS(validate_coupling(cfg, 3, 3), InvalidArgument);
}

TEST_CASE("dimension mismatches are rejected") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  NetworkState wrong(2, 3);
  std::vector<double> dx(6);
  CHECK_THROWS_AS(coupled_field(spec, g, cfg, wrong, dx), InvalidArgument);

  NetworkState x(3, 3);
  std::vector<double> small(3);
  CHECK_THROWS_AS(coupled_field(spec, g, cfg, x, small), InvalidArgument);
}

TEST_CASE("delayed field with constant identical history equals the undelayed field") {
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(3);
  CouplingConfig cfg;
  cfg.alpha = 1.3;
  NetworkState x = state_of(3, {2, 2, 2, 2, 2, 2, 2, 2, 2});

  CouplingConfig undelayed = cfg;
  std::vector<double> want(9);
  coupled_field(spec, g, undelayed, x, want);

  cfg.delay = 0.5;
  std::vector<double> got(9);
  for (DelayMode mode : {DelayMode::all_delayed, DelayMode::neighbor_only, DelayMode::leader_literal}) {
    delayed_coupled_field(spec, g, cfg, x, constant_history(x.states), mode, got);
    CHECK(got == want);
  }
}

TEST_CASE("delay to zero limit reproduces the undelayed output") {
  SystemSpec spec = builtin_system("rossler");
  DirectedGraph g = loop_topology_rossler();
  Rng rng(3);
  NetworkState x(5, 3);
  for (double& v : x.states) v = rng.uniform(-5, 5);

  CouplingConfig cfg;
  cfg.alpha = 1.2;
  std::vector<double> want(15);
  coupled_field(spec, g, cfg, x, want);

  cfg.delay = 1e-9;  // history returns the current states
  std::vector<double> got(15);
  for (DelayMode mode : {DelayMode::all_delayed, DelayMode::neighbor_only, DelayMode::leader_literal}) {
    delayed_coupled_field(spec, g, cfg, x, constant_history(x.states), mode, got);
    CHECK(got == want);
  }
}

TEST_CASE("delayed two-agent hand value") {
  // leader held at (1,1,1) for all past, follower at the origin: the follower
  // derivative is F(0) + alpha * G(leader_past) for every mode.
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(2);
  CouplingConfig cfg;
  cfg.alpha = 0.7;
  cfg.delay = 0.5;

  NetworkState x = state_of(2, {1, 1, 1, 0, 0, 0});
  std::vector<double> past = {1, 1, 1, 0, 0, 0};
  std::vector<double> dx(6);

  auto f0 = eval_vector_field(spec, std::vector<double>{0, 0, 0});
  auto g_leader = eval_nonlinear(spec, std::vector<double>{1, 1, 1});
  for (DelayMode mode : {DelayMode::all_delayed, DelayMode::neighbor_only, DelayMode::leader_literal}) {
    delayed_coupled_field(spec, g, cfg, x, constant_history(past), mode, dx);
    for (int k = 0; k < 3; ++k)
      CHECK(dx[3 + k] == doctest::Approx(f0[k] + 0.7 * g_leader[k]).epsilon(1e-14));
  }
}

TEST_CASE("delay modes differ when the agent's own state moved") {
  // current follower state differs from its history: all_delayed compares
  // G values at t - tau, neighbor_only subtracts the current own G
  SystemSpec spec = builtin_system("lu");
  DirectedGraph g = chain_topology(2);
  CouplingConfig cfg;
  cfg.alpha = 1.0;
  cfg.delay = 0.25;

  NetworkState x = state_of(2, {1, 1, 1, 2, 2, 2});
  std::vector<double> past = {1, 1, 1, 0.5, 0.5, 0.5};

  std::vector<double> all(6), neighbor(6);
  delayed_coupled_field(spec, g, cfg, x, constant_history(past), DelayMode::all_delayed, all);
  delayed_coupled_field(spec, g, cfg, x, constant_history(past), DelayMode::neighbor_only, neighbor);

  auto g_past_own = eval_nonlinear(spec, std::vector<double>{0.5, 0.5, 0.5});
  auto g_cur_own = eval_nonlinear(spec, std::vector<double>{2, 2, 2});
  bool differs = false;
  for (int k = 0; k < 3; ++k) {
    CHECK(all[3 + k] - neighbor[3 + k] ==
          doctest::Approx(g_cur_own[k] - g_past_own[k]).epsilon(1e-12));
    if (all[3 + k] != neighbor[3 + k]) differs = true;
  }
  CHECK(differs);
}

TEST_CASE("serial and parallel delayed kernels agree bitwise") {
  SystemSpec spec = builtin_system("rossler");
  DirectedGraph g = chain_topology(32);
  CouplingConfig cfg;
  cfg.alpha = 1.1;
  cfg.delay = 0.3;

  Rng rng(14);
  NetworkState x(32, 3);
  for (double& v : x.states) v = rng.uniform(-8, 8);
  std::vector<double> past(x.states.size());
  for (double& v : past) v = rng.uniform(-8, 8);

  std::vector<double> a(x.states.size()), b(x.states.size());
  delayed_coupled_field(spec, g, cfg, x, constant_history(past), DelayMode::all_delayed, a);
  delayed_coupled_field_serial(spec, g, cfg, x, constant_history(past), DelayMode::all_delayed, b);
  CHECK(a == b);
}

TEST_CASE("noise increments") {
  CouplingConfig cfg;

  SUBCASE("zero variance gives the zero vector") {
    Rng rng(1);
    cfg.noise_variance = 0.0;
    auto xi = noise_increment(cfg, 1e-3, 4, 3, rng);
    for (double v : xi) CHECK(v == 0.0);
  }

  SUBCASE("deterministic per seed") {
    cfg.noise_variance = 0.05;
    Rng r1(42), r2(42);
    auto a = noise_increment(cfg, 1e-3, 4, 3, r1);
    auto b = noise_increment(cfg, 1e-3, 4, 3, r2);
    CHECK(a == b);
  }

  SUBCASE("sample variance matches sigma^2 dt within 2%") {
    cfg.noise_variance = 0.01;
    const double dt = 1e-3;
    Rng rng(7);
    double sum = 0.0, sum_sq = 0.0;
    const int draws = 1000000 / 12;  // one million scalar components
    for (int k = 0; k < draws; ++k) {
      auto xi = noise_increment(cfg, dt, 4, 3, rng);
      for (double v : xi) {
        sum += v;
        sum_sq += v * v;
      }
    }
    double count = draws * 12.0;
    double mean = sum / count;
    double var = sum_sq / count - mean * mean;
    CHECK(var == doctest::Approx(1e-5).epsilon(0.02));
    CHECK(std::abs(mean) < 1e-5);
  }
}
