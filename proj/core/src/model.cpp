#include "nvstimex/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nvstimex/constants.hpp"

namespace nvstimex {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::domain_error(msg);
}

}  // namespace

void RateConstants::validate() const {
  require(l21_hz >= 0.0 && l23_hz >= 0.0 && l31_hz >= 0.0,
          "RateConstants: rates must be non-negative");
  require(l31_hz > l21_hz && l31_hz > l23_hz,
          "RateConstants: l31 must exceed l21 and l23 (fast phonon decay)");
}

void PumpDrive::validate() const {
  require(green_rate_hz >= 0.0, "PumpDrive: green_rate must be non-negative");
}

void PulseTrain::validate() const {
  require(eq_rate_hz >= 0.0, "PulseTrain: eq_rate must be non-negative");
  require(red2_rate_hz >= 0.0, "PulseTrain: red2_rate must be non-negative");
  require(sigma_t_s > 0.0, "PulseTrain: sigma_t must be positive");
  require(eq_width_s > 0.0, "PulseTrain: eq_width must be positive");
  require(period_s > 0.0, "PulseTrain: period must be positive");
  require(t0_s - window_half_width_s() >= 0.0 &&
              t0_s + window_half_width_s() <= period_s,
          "PulseTrain: pulse support (+-6 sigma) must fit within one period");
}

void PopulationState::validate() const {
  const double lo = -1e-12, hi = 1.0 + 1e-9;
  require(p1 >= lo && p1 <= hi && p2 >= lo && p2 <= hi && p3 >= lo && p3 <= hi,
          "PopulationState: probabilities must lie in [0,1]");
  require(std::abs(p1 + p2 + p3 - 1.0) <= 1e-9,
          "PopulationState: probabilities must sum to one");
}

void ModelParams::validate() const {
  rates.validate();
  pump.validate();
  if (pulses) pulses->validate();
}

double ModelParams::max_rate_hz() const {
  double m = std::max({rates.l21_hz, rates.l23_hz, rates.l31_hz, pump.green_rate_hz});
  if (pulses) {
    m = std::max(m, pulse_peak_rate_hz(*pulses, PulseChannel::stimulated));
    m = std::max(m, pulse_peak_rate_hz(*pulses, PulseChannel::excitation));
  }
  return m;
}

double photon_energy_j(double wavelength_nm) {
  if (!(wavelength_nm > 0.0))
    throw std::domain_error("photon_energy: wavelength must be positive");
  return constants::hc_j_m / (wavelength_nm * 1e-9);
}

double photon_energy_ev(double wavelength_nm) {
  return photon_energy_j(wavelength_nm) / constants::elementary_charge_c;
}

double rate_from_intensity(double cross_section_m2, double power_w,
                           double area_m2, double wavelength_nm) {
  if (!(cross_section_m2 > 0.0))
    throw std::domain_error("rate_from_intensity: cross-section must be positive");
  if (!(area_m2 > 0.0))
    throw std::domain_error("rate_from_intensity: area must be positive");
  if (power_w < 0.0)
    throw std::domain_error("rate_from_intensity: power must be non-negative");
  return cross_section_m2 * power_w / (area_m2 * photon_energy_j(wavelength_nm));
}

double pulse_peak_rate_hz(const PulseTrain& pulses, PulseChannel channel) {
  const double eq = channel == PulseChannel::stimulated ? pulses.eq_rate_hz
                                                        : pulses.red2_rate_hz;
  return eq * pulses.eq_width_s /
         (pulses.sigma_t_s * std::sqrt(2.0 * std::numbers::pi));
}

double pulse_rate_at(const PulseTrain& pulses, double t_s, PulseChannel channel) {
  const double peak = pulse_peak_rate_hz(pulses, channel);
  if (peak == 0.0) return 0.0;
  const double k = std::round((t_s - pulses.t0_s) / pulses.period_s);
  const double dt = t_s - (pulses.t0_s + k * pulses.period_s);
  const double x = dt / pulses.sigma_t_s;
  return peak * std::exp(-0.5 * x * x);
}

Derivs derivatives(const PopulationState& state, double t_s, const ModelParams& params) {
  double rate_red = 0.0, rate_red2 = 0.0;
  if (params.pulses) {
    rate_red = pulse_rate_at(*params.pulses, t_s, PulseChannel::stimulated);
    rate_red2 = pulse_rate_at(*params.pulses, t_s, PulseChannel::excitation);
  }

  // Population flows; each appears once as a gain and once as a loss, so the
  // three derivatives cancel exactly.
  const double f12 = (params.pump.green_rate_hz + rate_red2) * state.p1;
  const double f21 = params.rates.l21_hz * state.p2;
  const double f23 = (params.rates.l23_hz + rate_red) * state.p2;
  const double f32 = rate_red * state.p3;
  const double f31 = params.rates.l31_hz * state.p3;

  Derivs d;
  d.dp1_hz = -f12 + f21 + f31;
  d.dp2_hz = f12 - f21 - f23 + f32;
  d.dp3_hz = f23 - f32 - f31;
  return d;
}

PopulationState steady_state_analytic(const RateConstants& rates, const PumpDrive& pump) {
  rates.validate();
  pump.validate();
  if (pump.green_rate_hz == 0.0) return PopulationState{1.0, 0.0, 0.0};

  const double p2 = 1.0 / (1.0 +
                           (rates.l21_hz + rates.l23_hz) / pump.green_rate_hz +
                           rates.l23_hz / rates.l31_hz);
  const double p3 = rates.l23_hz / rates.l31_hz * p2;
  return PopulationState{1.0 - p2 - p3, p2, p3};
}

}  // namespace nvstimex
