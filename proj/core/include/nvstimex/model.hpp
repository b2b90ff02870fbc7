#pragma once

#include <optional>
#include <vector>

namespace nvstimex {

// Three-level scheme: |1> ground, |2> excited, |3> phonon-added ground state.
// All rates in Hz, all times in seconds, all wavelengths in nm.

struct RateConstants {
  double l21_hz = 65.3e6;  // spontaneous decay |2> -> |1| (all channels bypassing |3>)
  double l23_hz = 18e6;    // spontaneous decay |2> -> |3>
  double l31_hz = 1e12;    // phonon decay |3> -> |1>, fast compared to everything else

  // Requires non-negative rates and l31 strictly dominating l21 and l23.
  void validate() const;
  bool operator==(const RateConstants&) const = default;
};

struct PumpDrive {
  double green_rate_hz = 0.0;  // CW pump rate |1> -> |2>

  void validate() const;
  bool operator==(const PumpDrive&) const = default;
};

// Repeating Gaussian pulse carrying two optical channels: the stimulated
// channel coupling |2> <-> |3> and a weak excitation channel |1> -> |2>.
// Rates are square-pulse equivalents: the constant rate over eq_width_s whose
// time integral matches the Gaussian's.
struct PulseTrain {
  double eq_rate_hz = 0.0;    // stimulated channel, square-pulse equivalent
  double red2_rate_hz = 0.0;  // excitation channel, 0 disables it
  double sigma_t_s = 6e-12;   // Gaussian standard deviation
  double eq_width_s = 6e-12;  // square-pulse reference width
  double period_s = 0.0;      // repetition period
  double t0_s = 1e-9;         // centre of the first pulse

  // The +-6 sigma support must fit inside one period.
  double window_half_width_s() const { return 6.0 * sigma_t_s; }
  void validate() const;
  bool operator==(const PulseTrain&) const = default;
};

enum class PulseChannel { stimulated, excitation };

struct PopulationState {
  double p1 = 1.0;
  double p2 = 0.0;
  double p3 = 0.0;

  // Each probability in [0,1], sum within 1e-9 of one.
  void validate() const;
  bool operator==(const PopulationState&) const = default;
};

struct ModelParams {
  RateConstants rates;
  PumpDrive pump;
  std::optional<PulseTrain> pulses;

  void validate() const;
  // Largest rate appearing anywhere in the model, pulse peaks included.
  double max_rate_hz() const;
  bool operator==(const ModelParams&) const = default;
};

struct Derivs {
  double dp1_hz = 0.0;
  double dp2_hz = 0.0;
  double dp3_hz = 0.0;
};

// Time series of states plus the derived emission signal (proportional to p2).
struct Trajectory {
  std::vector<double> times_s;           // strictly increasing
  std::vector<PopulationState> states;   // same length
  std::vector<double> emission;          // same length, arbitrary units

  std::size_t size() const { return times_s.size(); }
};

// Photon energy hc/lambda. Throws std::domain_error for wavelength <= 0.
double photon_energy_ev(double wavelength_nm);
double photon_energy_j(double wavelength_nm);

// Stimulated rate sigma * P / (A * hbar*omega) from cross-section, beam power
// and focus area.
double rate_from_intensity(double cross_section_m2, double power_w,
                           double area_m2, double wavelength_nm);

// Instantaneous Gaussian rate of the pulse whose centre is nearest to t.
// Peak chosen so the integral over one pulse equals eq_rate * eq_width.
double pulse_rate_at(const PulseTrain& pulses, double t_s, PulseChannel channel);
double pulse_peak_rate_hz(const PulseTrain& pulses, PulseChannel channel);

// Right-hand side of the population equations. The component sum vanishes
// analytically: every flow enters one state and leaves another.
Derivs derivatives(const PopulationState& state, double t_s, const ModelParams& params);

// Closed-form stationary point of the pulse-free system.
PopulationState steady_state_analytic(const RateConstants& rates, const PumpDrive& pump);

}  // namespace nvstimex
