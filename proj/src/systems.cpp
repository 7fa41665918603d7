#include "chaosnet/systems.hpp"

#include <string>
#include <utility>
#include <vector>

#include "chaosnet/errors.hpp"

namespace chaosnet {

namespace {

void check_dim(const SystemSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.dim)
    throw InvalidArgument("system '" + spec.name + "': state has size " +
                          std::to_string(x.size()) + ", expected " + std::to_string(spec.dim));
}

Matrix matrix3(double a00, double a01, double a02, double a10, double a11, double a12,
               double a20, double a21, double a22) {
  Matrix m(3, 3);
  m(0, 0) = a00; m(0, 1) = a01; m(0, 2) = a02;
  m(1, 0) = a10; m(1, 1) = a11; m(1, 2) = a12;
  m(2, 0) = a20; m(2, 1) = a21; m(2, 2) = a22;
  return m;
}

}  // namespace

SystemSpec make_system(std::string name, int dim, Matrix linear_part,
                       std::map<std::string, double> params,
                       std::function<void(std::span<const double>, std::span<double>)> nonlinear,
                       std::function<void(std::span<const double>, Matrix&)> nonlinear_jacobian) {
  if (dim < 1) throw InvalidArgument("make_system: dim must be >= 1");
  if (linear_part.rows() != dim || linear_part.cols() != dim)
    throw InvalidArgument("make_system: linear_part must be " + std::to_string(dim) + "x" +
                          std::to_string(dim));
  if (!nonlinear || !nonlinear_jacobian)
    throw InvalidArgument("make_system: nonlinear map and Jacobian are required");
  SystemSpec spec;
  spec.name = std::move(name);
  spec.dim = dim;
  spec.linear_part = std::move(linear_part);
  spec.params = std::move(params);
  spec.nonlinear = std::move(nonlinear);
  spec.nonlinear_jacobian = std::move(nonlinear_jacobian);
  return spec;
}

SystemSpec builtin_system(std::string_view name) {
  if (name == "lu") {
    const double a = 36.0, b = 3.0, c = 20.0;
    return make_system(
        "lu", 3, matrix3(-a, a, 0, 0, c, 0, 0, 0, -b), {{"a", a}, {"b", b}, {"c", c}},
        [](std::span<const double> x, std::span<double> g) {
          g[0] = 0.0;
          g[1] = -x[0] * x[2];
          g[2] = x[0] * x[1];
        },
        [](std::span<const double> x, Matrix& j) {
          j = Matrix(3, 3);
          j(1, 0) = -x[2];
          j(1, 2) = -x[0];
          j(2, 0) = x[1];
          j(2, 1) = x[0];
        });
  }
  if (name == "rossler") {
    const double a = 0.2, b = 0.2, c = 5.7;
    return make_system(
        "rossler", 3, matrix3(0, -1, -1, 1, a, 0, 0, 0, -c), {{"a", a}, {"b", b}, {"c", c}},
        [b](std::span<const double> x, std::span<double> g) {
          g[0] = 0.0;
          g[1] = 0.0;
          g[2] = b + x[2] * x[0];
        },
        [](std::span<const double> x, Matrix& j) {
          // the additive constant b contributes nothing to the Jacobian
          j = Matrix(3, 3);
          j(2, 0) = x[2];
          j(2, 2) = x[0];
        });
  }
  if (name == "chen") {
    const double a = 35.0, b = 3.0, c = 28.0;
    return make_system(
        "chen", 3, matrix3(-a, a, 0, c - a, c, 0, 0, 0, -b), {{"a", a}, {"b", b}, {"c", c}},
        [](std::span<const double> x, std::span<double> g) {
          g[0] = 0.0;
          g[1] = -x[0] * x[2];
          g[2] = x[0] * x[1];
        },
        [](std::span<const double> x, Matrix& j) {
          j = Matrix(3, 3);
          j(1, 0) = -x[2];
          j(1, 2) = -x[0];
          j(2, 0) = x[1];
          j(2, 1) = x[0];
        });
  }
  throw InvalidArgument("builtin_system: unknown system '" + std::string(name) +
                        "' (expected lu, rossler, or chen)");
}

void eval_nonlinear(const SystemSpec& spec, std::span<const double> x, std::span<double> out) {
  check_dim(spec, x);
  check_dim(spec, out);
  spec.nonlinear(x, out);
}

std::vector<double> eval_nonlinear(const SystemSpec& spec, std::span<const double> x) {
  std::vector<double> g(spec.dim);
  eval_nonlinear(spec, x, g);
  return g;
}

void eval_vector_field(const SystemSpec& spec, std::span<const double> x, std::span<double> out) {
  check_dim(spec, x);
  check_dim(spec, out);
  std::vector<double> g(spec.dim);
  spec.nonlinear(x, g);
  spec.linear_part.apply(x, out);
  for (int i = 0; i < spec.dim; ++i) out[i] += g[i];
}

std::vector<double> eval_vector_field(const SystemSpec& spec, std::span<const double> x) {
  std::vector<double> f(spec.dim);
  eval_vector_field(spec, x, f);
  return f;
}

Matrix jacobian_nonlinear(const SystemSpec& spec, std::span<const double> x) {
  check_dim(spec, x);
  Matrix j;
  spec.nonlinear_jacobian(x, j);
  return j;
}

}  // namespace chaosnet
