#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "chaosnet/linalg.hpp"

namespace chaosnet {

// Agent dynamics split as xdot = L x + G(x): a constant linear part and a
// residual nonlinear map with an analytic Jacobian. Immutable after
// construction; safe to share across threads.
struct SystemSpec {
  std::string name;
  int dim = 0;
  Matrix linear_part;
  std::map<std::string, double> params;

  std::function<void(std::span<const double>, std::span<double>)> nonlinear;
  std::function<void(std::span<const double>, Matrix&)> nonlinear_jacobian;
};

// Programmatic constructor (validates dimensions). The scenario front end only
// exposes the named builtins; this exists for tests and custom analyses.
SystemSpec make_system(std::string name, int dim, Matrix linear_part,
                       std::map<std::string, double> params,
                       std::function<void(std::span<const double>, std::span<double>)> nonlinear,
                       std::function<void(std::span<const double>, Matrix&)> nonlinear_jacobian);

// Builtins: "lu" (a=36, b=3, c=20), "rossler" (a=0.2, b=0.2, c=5.7),
// "chen" (a=35, b=3, c=28). The linear/nonlinear split takes the maximal
// linear part; products of states and additive constants live in G:
//   lu:      L = ((-a,a,0),(0,c,0),(0,0,-b)),       G = (0, -xz, xy)
//   rossler: L = ((0,-1,-1),(1,a,0),(0,0,-c)),      G = (0, 0, b + zx)
//   chen:    L = ((-a,a,0),(c-a,c,0),(0,0,-b)),     G = (0, -xz, xy)
SystemSpec builtin_system(std::string_view name);

// G(x)
std::vector<double> eval_nonlinear(const SystemSpec& spec, std::span<const double> x);
void eval_nonlinear(const SystemSpec& spec, std::span<const double> x, std::span<double> out);

// L x + G(x)
std::vector<double> eval_vector_field(const SystemSpec& spec, std::span<const double> x);
void eval_vector_field(const SystemSpec& spec, std::span<const double> x, std::span<double> out);

// Analytic J_G(x)
Matrix jacobian_nonlinear(const SystemSpec& spec, std::span<const double> x);

}  // namespace chaosnet
