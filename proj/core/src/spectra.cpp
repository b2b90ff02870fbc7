#include "nvstimex/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <stdexcept>

#include "nvstimex/errors.hpp"

namespace nvstimex {

namespace {

double gaussian(double x, double mu, double sigma) {
  const double u = (x - mu) / sigma;
  return std::exp(-0.5 * u * u);
}

// Parses one strictly numeric field; the full field must be consumed.
bool parse_field(const std::string& field, double& out) {
  const char* begin = field.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t') ++end;
  return *end == '\0';
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

const char* to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::stimulated_emission_dominant:
      return "StimulatedEmissionDominant";
    case RegimeLabel::ionisation_dominant:
      return "IonisationDominant";
    case RegimeLabel::transition:
      return "Transition";
  }
  return "unknown";
}

void SpectrumCurve::validate() const {
  if (wavelengths_nm.size() != values.size())
    throw std::domain_error("SpectrumCurve: wavelength/value lengths differ");
  if (wavelengths_nm.size() < 2)
    throw std::domain_error("SpectrumCurve: need at least two points");
  for (std::size_t i = 0; i < wavelengths_nm.size(); ++i) {
    if (values[i] < 0.0)
      throw std::domain_error("SpectrumCurve: negative value");
    if (i > 0 && !(wavelengths_nm[i] > wavelengths_nm[i - 1]))
      throw std::domain_error("SpectrumCurve: wavelengths must be strictly increasing");
  }
}

double SpectrumCurve::value_at(double wavelength_nm) const {
  if (wavelength_nm < min_wavelength_nm() || wavelength_nm > max_wavelength_nm())
    throw std::domain_error("SpectrumCurve: query outside tabulated range");
  const auto it = std::lower_bound(wavelengths_nm.begin(), wavelengths_nm.end(),
                                   wavelength_nm);
  if (it == wavelengths_nm.begin()) return values.front();
  const auto hi = static_cast<std::size_t>(it - wavelengths_nm.begin());
  if (hi == wavelengths_nm.size()) return values.back();
  const std::size_t lo = hi - 1;
  const double w = (wavelength_nm - wavelengths_nm[lo]) /
                   (wavelengths_nm[hi] - wavelengths_nm[lo]);
  return values[lo] + w * (values[hi] - values[lo]);
}

SpectrumCurve load_spectrum(std::istream& in) {
  SpectrumCurve curve;
  std::string line;
  long line_no = 0;
  bool saw_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;

    const auto comma = text.find(',');
    if (comma == std::string::npos)
      throw ParseError("load_spectrum: line " + std::to_string(line_no) +
                       ": expected 'wavelength_nm,intensity'");
    const std::string left = trim(text.substr(0, comma));
    const std::string right = trim(text.substr(comma + 1));

    double wl = 0.0, value = 0.0;
    if (!parse_field(left, wl)) {
      if (!saw_content) continue;  // header row
      throw ParseError("load_spectrum: line " + std::to_string(line_no) +
                       ": cannot parse wavelength '" + left + "'");
    }
    if (!parse_field(right, value))
      throw ParseError("load_spectrum: line " + std::to_string(line_no) +
                       ": cannot parse intensity '" + right + "'");
    if (value < 0.0)
      throw ParseError("load_spectrum: line " + std::to_string(line_no) +
                       ": negative intensity");
    saw_content = true;
    curve.wavelengths_nm.push_back(wl);
    curve.values.push_back(value);
  }
  if (curve.wavelengths_nm.size() < 2)
    throw ParseError("load_spectrum: need at least two data rows");

  std::vector<std::size_t> order(curve.wavelengths_nm.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curve.wavelengths_nm[a] < curve.wavelengths_nm[b];
  });
  SpectrumCurve sorted;
  sorted.wavelengths_nm.reserve(order.size());
  sorted.values.reserve(order.size());
  for (std::size_t i : order) {
    if (!sorted.wavelengths_nm.empty() &&
        sorted.wavelengths_nm.back() == curve.wavelengths_nm[i])
      throw ParseError("load_spectrum: duplicate wavelength " +
                       std::to_string(curve.wavelengths_nm[i]));
    sorted.wavelengths_nm.push_back(curve.wavelengths_nm[i]);
    sorted.values.push_back(curve.values[i]);
  }
  sorted.validate();
  return sorted;
}

SpectrumCurve smooth_running_average(const SpectrumCurve& curve, double window_nm) {
  curve.validate();
  if (!(window_nm > 0.0))
    throw std::domain_error("smooth_running_average: window must be positive");

  SpectrumCurve out = curve;
  const double half = window_nm / 2.0;
  const auto& wl = curve.wavelengths_nm;
  for (std::size_t i = 0; i < wl.size(); ++i) {
    const auto lo = std::lower_bound(wl.begin(), wl.end(), wl[i] - half);
    const auto hi = std::upper_bound(wl.begin(), wl.end(), wl[i] + half);
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it)
      sum += curve.values[static_cast<std::size_t>(it - wl.begin())];
    out.values[i] = sum / static_cast<double>(hi - lo);
  }
  return out;
}

// Synthetic spectrum shape parameters (model stand-in, not measured data).
namespace {
constexpr double zpl_centre_nm = 637.0;
constexpr double zpl_sigma_nm = 2.5;
constexpr double zpl_amplitude = 0.35;
constexpr double sideband_centre_nm = 682.0;
constexpr double sideband_sigma_left_nm = 26.0;
constexpr double sideband_sigma_right_nm = 42.0;
}  // namespace

double synthetic_nv_zpl(double wavelength_nm) {
  return zpl_amplitude * gaussian(wavelength_nm, zpl_centre_nm, zpl_sigma_nm);
}

double synthetic_nv_sideband(double wavelength_nm) {
  const double sigma = wavelength_nm < sideband_centre_nm ? sideband_sigma_left_nm
                                                          : sideband_sigma_right_nm;
  return gaussian(wavelength_nm, sideband_centre_nm, sigma);
}

SpectrumCurve synthetic_nv_spectrum(double resolution_nm) {
  if (!(resolution_nm > 0.0))
    throw std::domain_error("synthetic_nv_spectrum: resolution must be positive");
  SpectrumCurve curve;
  const double lo = 550.0, hi = 850.0;
  const auto n = static_cast<long>(std::floor((hi - lo) / resolution_nm + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double wl = lo + k * resolution_nm;
    curve.wavelengths_nm.push_back(wl);
    curve.values.push_back(synthetic_nv_zpl(wl) + synthetic_nv_sideband(wl));
  }
  curve.validate();
  return curve;
}

SpectrumCurve rate_curve_from_spectrum(const SpectrumCurve& curve,
                                       double anchor_rate_hz,
                                       double anchor_wavelength_nm) {
  curve.validate();
  if (curve.kind != SpectrumKind::emission_intensity)
    throw std::domain_error("rate_curve_from_spectrum: input must be an emission spectrum");
  if (anchor_rate_hz < 0.0)
    throw std::domain_error("rate_curve_from_spectrum: anchor rate must be non-negative");
  const double anchor_value = curve.value_at(anchor_wavelength_nm);
  if (!(anchor_value > 0.0))
    throw std::domain_error("rate_curve_from_spectrum: spectrum vanishes at the anchor");

  SpectrumCurve out = curve;
  out.kind = SpectrumKind::rate_curve;
  const double scale = anchor_rate_hz / anchor_value;
  for (double& v : out.values) v *= scale;
  return out;
}

double band_average(const SpectrumCurve& curve, double centre_nm, double bandwidth_nm) {
  curve.validate();
  if (bandwidth_nm < 0.0)
    throw std::domain_error("band_average: bandwidth must be non-negative");

  const double lo = std::max(centre_nm - bandwidth_nm / 2.0, curve.min_wavelength_nm());
  const double hi = std::min(centre_nm + bandwidth_nm / 2.0, curve.max_wavelength_nm());
  if (!(hi >= lo))
    throw std::domain_error("band_average: band does not overlap the curve range");
  if (hi == lo) return curve.value_at(lo);

  // Exact integral of the piecewise-linear interpolant over [lo, hi].
  double integral = 0.0;
  double x_prev = lo, v_prev = curve.value_at(lo);
  const auto& wl = curve.wavelengths_nm;
  for (std::size_t i = 0; i < wl.size(); ++i) {
    if (wl[i] <= lo) continue;
    if (wl[i] >= hi) break;
    integral += 0.5 * (v_prev + curve.values[i]) * (wl[i] - x_prev);
    x_prev = wl[i];
    v_prev = curve.values[i];
  }
  integral += 0.5 * (v_prev + curve.value_at(hi)) * (hi - x_prev);
  return integral / (hi - lo);
}

RegimeLabel classify_regime(double wavelength_nm) {
  if (!(wavelength_nm > 0.0))
    throw std::domain_error("classify_regime: wavelength must be positive");
  if (wavelength_nm > 680.0) return RegimeLabel::stimulated_emission_dominant;
  if (wavelength_nm < 640.0) return RegimeLabel::ionisation_dominant;
  return RegimeLabel::transition;
}

}  // namespace nvstimex
