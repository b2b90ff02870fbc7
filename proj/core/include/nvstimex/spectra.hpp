#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nvstimex {

enum class SpectrumKind { emission_intensity, rate_curve };

// Pulsed-wavelength regimes: stimulated emission dominates above 680 nm,
// ionisation below 640 nm, with a transition band in between.
enum class RegimeLabel {
  stimulated_emission_dominant,
  ionisation_dominant,
  transition,
};

const char* to_string(RegimeLabel label);

// Tabulated intensity (arbitrary units) or rate (Hz) versus wavelength.
struct SpectrumCurve {
  std::vector<double> wavelengths_nm;  // strictly increasing
  std::vector<double> values;          // non-negative, same length
  SpectrumKind kind = SpectrumKind::emission_intensity;

  void validate() const;
  double min_wavelength_nm() const { return wavelengths_nm.front(); }
  double max_wavelength_nm() const { return wavelengths_nm.back(); }
  // Linear interpolation; throws std::domain_error outside the tabulated range.
  double value_at(double wavelength_nm) const;

  bool operator==(const SpectrumCurve&) const = default;
};

// Reads `wavelength_nm,intensity` records. `#` lines are comments, a leading
// non-numeric row is treated as a header, rows are sorted by wavelength.
// Throws ParseError with the offending line number on malformed input.
SpectrumCurve load_spectrum(std::istream& in);

// Each output value is the mean of the input values within +-window/2 of its
// wavelength; boundary points average over the truncated window.
SpectrumCurve smooth_running_average(const SpectrumCurve& curve, double window_nm);

// Deterministic model emission spectrum on [550, 850] nm: a narrow line at
// 637 nm on top of a broad asymmetric sideband peaking at 682 nm. Synthetic
// stand-in for a measured spectrum; shaped by the component functions below.
SpectrumCurve synthetic_nv_spectrum(double resolution_nm);
double synthetic_nv_sideband(double wavelength_nm);
double synthetic_nv_zpl(double wavelength_nm);

// Rescales an emission spectrum so its value at anchor_wavelength equals
// anchor_rate, yielding the stimulated-rate curve.
SpectrumCurve rate_curve_from_spectrum(const SpectrumCurve& curve,
                                       double anchor_rate_hz,
                                       double anchor_wavelength_nm);

// Mean of the linearly interpolated curve over the band (trapezoidal), band
// clipped to the tabulated range. Throws std::domain_error when disjoint.
double band_average(const SpectrumCurve& curve, double centre_nm, double bandwidth_nm);

RegimeLabel classify_regime(double wavelength_nm);

}  // namespace nvstimex
