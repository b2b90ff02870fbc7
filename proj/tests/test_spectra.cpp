#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "nvstimex/errors.hpp"
#include "nvstimex/spectra.hpp"

using namespace nvstimex;

TEST_CASE("load spectrum") {
  SUBCASE("two-point curve") {
    std::istringstream in("600,1.0\n700,2.0\n");
    const SpectrumCurve curve = load_spectrum(in);
    REQUIRE(curve.wavelengths_nm.size() == 2);
    CHECK(curve.wavelengths_nm[0] == 600.0);
    CHECK(curve.values[1] == 2.0);
  }

  SUBCASE("rows are sorted on load") {
    std::istringstream shuffled("700,2.0\n600,1.0\n650,1.5\n");
    std::istringstream sorted("600,1.0\n650,1.5\n700,2.0\n");
    CHECK(load_spectrum(shuffled) == load_spectrum(sorted));
  }

  SUBCASE("malformed rows name the line") {
    std::istringstream in("700,abc");
    CHECK_THROWS_WITH_AS(load_spectrum(in), doctest::Contains("line 1"), ParseError);
    std::istringstream in2("600,1.0\n650,1.5\nx700,2.0\n");
    CHECK_THROWS_WITH_AS(load_spectrum(in2), doctest::Contains("line 3"), ParseError);
  }

  SUBCASE("header and comments are skipped") {
    std::istringstream in(
        "# NV emission\nwavelength_nm,intensity\n600,1.0\n\n700,2.0\n");
    CHECK(load_spectrum(in).wavelengths_nm.size() == 2);
  }

  SUBCASE("duplicates and negatives are rejected") {
    std::istringstream dup("600,1.0\n600,2.0\n");
    CHECK_THROWS_AS(load_spectrum(dup), ParseError);
    std::istringstream neg("600,1.0\n700,-2.0\n");
    CHECK_THROWS_AS(load_spectrum(neg), ParseError);
    std::istringstream single("600,1.0\n");
    CHECK_THROWS_AS(load_spectrum(single), ParseError);
  }
}

TEST_CASE("running-average smoothing") {
  SpectrumCurve spikes;
  spikes.wavelengths_nm = {600, 601, 602, 603, 604};
  spikes.values = {0, 0, 3, 0, 0};

  SUBCASE("window below the point spacing is the identity") {
    CHECK(smooth_running_average(spikes, 0.5).values == spikes.values);
  }

  SUBCASE("constant curves are fixed points") {
    SpectrumCurve flat;
    flat.wavelengths_nm = {600, 610, 620, 640};
    flat.values = {2.5, 2.5, 2.5, 2.5};
    for (double window : {1.0, 5.0, 100.0})
      CHECK(smooth_running_average(flat, window).values == flat.values);
  }

  SUBCASE("three-point mean at the spike") {
    const SpectrumCurve smoothed = smooth_running_average(spikes, 3.0);
    CHECK(smoothed.values[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(smoothed.values[0] == 0.0);
  }

  SUBCASE("mass is approximately preserved and extrema are bounded") {
    const SpectrumCurve curve = synthetic_nv_spectrum(1.0);
    for (double window : {4.0, 13.0}) {
      const SpectrumCurve smoothed = smooth_running_average(curve, window);
      double mean_in = 0.0, mean_out = 0.0, max_in = 0.0, max_out = 0.0;
      double min_in = 1e300, min_out = 1e300;
      for (std::size_t i = 0; i < curve.values.size(); ++i) {
        mean_in += curve.values[i];
        mean_out += smoothed.values[i];
        max_in = std::max(max_in, curve.values[i]);
        max_out = std::max(max_out, smoothed.values[i]);
        min_in = std::min(min_in, curve.values[i]);
        min_out = std::min(min_out, smoothed.values[i]);
      }
      CHECK(mean_out == doctest::Approx(mean_in).epsilon(0.01));
      CHECK(max_out <= max_in + 1e-12);
      CHECK(min_out >= min_in - 1e-12);
    }
  }
}

TEST_CASE("synthetic emission spectrum") {
  const SpectrumCurve curve = synthetic_nv_spectrum(1.0);

  SUBCASE("sideband component peaks at 682 nm") {
    double best_wl = 0.0, best = -1.0;
    for (double wl = 550.0; wl <= 850.0; wl += 1.0) {
      if (synthetic_nv_sideband(wl) > best) {
        best = synthetic_nv_sideband(wl);
        best_wl = wl;
      }
    }
    CHECK(best_wl == 682.0);
    // and it carries the curve's global maximum too
    std::size_t arg = 0;
    for (std::size_t i = 0; i < curve.values.size(); ++i)
      if (curve.values[i] > curve.values[arg]) arg = i;
    CHECK(curve.wavelengths_nm[arg] == 682.0);
  }

  SUBCASE("support dies off at the red edge") {
    CHECK(curve.value_at(850.0) < 0.01 * curve.value_at(682.0));
  }

  SUBCASE("zero-phonon line sits on the sideband shoulder") {
    CHECK(synthetic_nv_zpl(637.0) == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(curve.value_at(637.0) > curve.value_at(650.0));
  }

  SUBCASE("deterministic construction") {
    CHECK(synthetic_nv_spectrum(1.0) == curve);
    CHECK(synthetic_nv_spectrum(0.5).wavelengths_nm.size() == 601);
  }
}

TEST_CASE("rate curve from spectrum") {
  const SpectrumCurve spectrum = synthetic_nv_spectrum(1.0);

  SUBCASE("anchor at the maximum pins the maximum") {
    const SpectrumCurve rate = rate_curve_from_spectrum(spectrum, 6e9, 682.0);
    CHECK(rate.kind == SpectrumKind::rate_curve);
    double max = 0.0;
    for (double v : rate.values) max = std::max(max, v);
    CHECK(max == 6e9);  // exact: the anchor sits on the maximum sample
  }

  SUBCASE("zero anchor rate zeroes the curve") {
    const SpectrumCurve rate = rate_curve_from_spectrum(spectrum, 0.0, 682.0);
    for (double v : rate.values) CHECK(v == 0.0);
  }

  SUBCASE("overall intensity scale cancels") {
    SpectrumCurve doubled = spectrum;
    for (double& v : doubled.values) v *= 2.0;
    CHECK(rate_curve_from_spectrum(doubled, 6e9, 682.0).values ==
          rate_curve_from_spectrum(spectrum, 6e9, 682.0).values);
  }

  SUBCASE("anchor outside the range or on a dead spectrum fails") {
    CHECK_THROWS_AS(rate_curve_from_spectrum(spectrum, 6e9, 900.0), std::domain_error);
    SpectrumCurve dead;
    dead.wavelengths_nm = {600, 700};
    dead.values = {0.0, 1.0};
    CHECK_THROWS_AS(rate_curve_from_spectrum(dead, 6e9, 600.0), std::domain_error);
  }
}

TEST_CASE("band average") {
  SUBCASE("constant curves average to the constant") {
    SpectrumCurve flat;
    flat.wavelengths_nm = {600, 700, 800};
    flat.values = {3.0, 3.0, 3.0};
    for (double centre : {620.0, 700.0, 795.0})
      CHECK(band_average(flat, centre, 20.0) == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("zero bandwidth degenerates to interpolation") {
    SpectrumCurve curve;
    curve.wavelengths_nm = {600, 700};
    curve.values = {1.0, 3.0};
    CHECK(band_average(curve, 650.0, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("linear curve averages exactly") {
    SpectrumCurve line;
    for (double wl = 600; wl <= 800; wl += 10) {
      line.wavelengths_nm.push_back(wl);
      line.values.push_back(wl);
    }
    CHECK(band_average(line, 700.0, 20.0) == doctest::Approx(700.0).epsilon(1e-12));
  }

  SUBCASE("result is bounded by the band extrema") {
    const SpectrumCurve curve = synthetic_nv_spectrum(1.0);
    for (double centre : {660.0, 700.0, 780.0}) {
      const double avg = band_average(curve, centre, 20.0);
      double lo = 1e300, hi = 0.0;
      for (double wl = centre - 10; wl <= centre + 10; wl += 0.5) {
        lo = std::min(lo, curve.value_at(wl));
        hi = std::max(hi, curve.value_at(wl));
      }
      CHECK(avg >= lo - 1e-12);
      CHECK(avg <= hi + 1e-12);
    }
  }

  SUBCASE("disjoint bands fail") {
    SpectrumCurve curve;
    curve.wavelengths_nm = {600, 700};
    curve.values = {1.0, 1.0};
    CHECK_THROWS_AS(band_average(curve, 900.0, 20.0), std::domain_error);
  }
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(700.0) == RegimeLabel::stimulated_emission_dominant);
  CHECK(classify_regime(620.0) == RegimeLabel::ionisation_dominant);
  CHECK(classify_regime(660.0) == RegimeLabel::transition);
  // inclusive transition edges
  CHECK(classify_regime(640.0) == RegimeLabel::transition);
  CHECK(classify_regime(680.0) == RegimeLabel::transition);
  CHECK_THROWS_AS(classify_regime(0.0), std::domain_error);

  SUBCASE("labels partition the axis into three runs") {
    int transitions = 0;
    RegimeLabel last = classify_regime(1.0);
    for (double wl = 2.0; wl <= 1200.0; wl += 0.25) {
      const RegimeLabel now = classify_regime(wl);
      if (now != last) ++transitions;
      last = now;
    }
    CHECK(transitions == 2);
    CHECK(last == RegimeLabel::stimulated_emission_dominant);
  }
}
