#pragma once

#include <stdexcept>
#include <string>

namespace chaosnet {

// Input validation failures: bad dimensions, unknown names, out-of-range values.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// Operations called on objects whose internal state cannot answer them,
// e.g. a history lookup before the recorded range.
class InvalidState : public std::logic_error {
 public:
  explicit InvalidState(const std::string& what) : std::logic_error(what) {}
};

// A trajectory left the representable regime: non-finite derivative or a
// state component past the divergence threshold. Carries the failure time.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Linear-algebra failures: singular Lyapunov operator, QR non-convergence.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario config problems (parse errors, unresolved names, bad ranges).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace chaosnet
