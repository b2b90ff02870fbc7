#pragma once

#include <algorithm>
#include <vector>

#include "nvstimex/model.hpp"

namespace test_support {

// Pulse-train configuration of the pump-power experiment: 13 GHz stimulated
// pulses with the weak 0.85 GHz excitation channel at 10 MHz repetition.
inline nvstimex::ModelParams power_experiment_params(double green_rate_hz) {
  nvstimex::ModelParams params;
  params.pump.green_rate_hz = green_rate_hz;
  params.pulses = nvstimex::PulseTrain{13e9, 0.85e9, 6e-12, 6e-12, 100e-9, 1e-9};
  return params;
}

// Wavelength-experiment configuration: 40 MHz repetition, stimulated channel
// only (rate set per test).
inline nvstimex::ModelParams wavelength_experiment_params(double eq_rate_hz) {
  nvstimex::ModelParams params;
  params.pump.green_rate_hz = 92e6;
  params.pulses = nvstimex::PulseTrain{eq_rate_hz, 0.0, 6e-12, 6e-12, 25e-9, 1e-9};
  return params;
}

inline double min_of(const std::vector<double>& values) {
  return *std::min_element(values.begin(), values.end());
}

// Slow relaxation eigenvalue of the pulse-free system; the exponential
// recovery constant is its reciprocal.
inline double slow_eigenvalue_hz(const nvstimex::RateConstants& rates,
                                 double green_rate_hz) {
  const double b = green_rate_hz + rates.l21_hz + rates.l23_hz + rates.l31_hz;
  const double c = rates.l31_hz * (green_rate_hz + rates.l21_hz + rates.l23_hz) +
                   green_rate_hz * rates.l23_hz;
  return (b - std::sqrt(b * b - 4.0 * c)) / 2.0;
}

}  // namespace test_support
