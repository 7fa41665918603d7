#include "chaosnet/securecomm.hpp"

#include <cmath>
#include <numbers>

#include "chaosnet/errors.hpp"

namespace chaosnet {

MaskFn first_component_mask() {
  return [](std::span<const double> x) { return x[0]; };
}

MaskFn zero_mask() {
  return [](std::span<const double>) { return 0.0; };
}

MaskedSignal mask(std::span<const double> times, std::span<const double> message,
                  std::span<const std::vector<double>> leader_states, const MaskFn& h) {
  if (message.size() != leader_states.size() || message.size() != times.size())
    throw InvalidArgument("mask: message, times and state series lengths differ");
  MaskedSignal s;
  s.times.assign(times.begin(), times.end());
  s.samples.resize(message.size());
  for (size_t k = 0; k < message.size(); ++k) s.samples[k] = message[k] + h(leader_states[k]);
  s.mask_desc = "h(x) = x[0]";
  return s;
}

std::vector<double> demask(const MaskedSignal& signal,
                           std::span<const std::vector<double>> follower_states, const MaskFn& h) {
  if (signal.samples.size() != follower_states.size())
    throw InvalidArgument("demask: signal and state series lengths differ");
  std::vector<double> recovered(signal.samples.size());
  for (size_t k = 0; k < recovered.size(); ++k)
    recovered[k] = signal.samples[k] - h(follower_states[k]);
  return recovered;
}

namespace {

double mean_square(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

}  // namespace

double snr_improvement_db(std::span<const double> message, std::span<const double> masked,
                          std::span<const double> recovered) {
  if (message.size() != masked.size() || message.size() != recovered.size() || message.empty())
    throw InvalidArgument("snr_improvement_db: series lengths differ or empty");

  double p_m = 0.0;
  for (double m : message) p_m += m * m;
  p_m /= static_cast<double>(message.size());
  if (p_m == 0.0) throw InvalidArgument("snr_improvement_db: zero message power");

  double p_mask_err = mean_square(masked, message);
  double p_rec_err = mean_square(recovered, message);

  auto snr_db = [&](double err_power) {
    if (err_power <= p_m * std::pow(10.0, -kSnrCapDb / 10.0)) return kSnrCapDb;
    return 10.0 * std::log10(p_m / err_power);
  };
  double improvement = snr_db(p_rec_err) - snr_db(p_mask_err);
  return std::min(improvement, kSnrCapDb);
}

double demo_message(double t) {
  return 0.8 * std::sin(2.0 * std::numbers::pi * 2.0 * t);
}

}  // namespace chaosnet
