#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace chaosnet {

// Scalar masking function over an agent state. The default takes the first
// state component, which keeps the recovery-error bound exact:
// |m_hat - m| = |h(x_i) - h(x_1)|.
using MaskFn = std::function<double(std::span<const double>)>;

MaskFn first_component_mask();
MaskFn zero_mask();  // test hook: h == 0 passes the message through

// Masked transmission s(t) = m(t) + h(x_1(t)).
struct MaskedSignal {
  std::vector<double> times;
  std::vector<double> samples;
  std::string message_desc;
  std::string mask_desc;
};

// leader_states: one state vector per sample, aligned with message/times.
MaskedSignal mask(std::span<const double> times, std::span<const double> message,
                  std::span<const std::vector<double>> leader_states,
                  const MaskFn& h = first_component_mask());

// m_hat(t) = s(t) - h(x_i(t)) at the synchronized receiver.
std::vector<double> demask(const MaskedSignal& signal,
                           std::span<const std::vector<double>> follower_states,
                           const MaskFn& h = first_component_mask());

// SNR_out - SNR_in in dB, powers as mean squares over the series:
//   SNR_in  = 10 log10( P_m / P_{s-m} ),  SNR_out = 10 log10( P_m / P_{mhat-m} ).
// Perfect recovery is capped at +200 dB.
double snr_improvement_db(std::span<const double> message, std::span<const double> masked,
                          std::span<const double> recovered);

inline constexpr double kSnrCapDb = 200.0;

// The demo message from the secure-communication example: 0.8 sin(2 pi 2 t).
double demo_message(double t);

}  // namespace chaosnet
