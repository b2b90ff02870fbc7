#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "nvstimex/model.hpp"
#include "test_support.hpp"

using namespace nvstimex;

TEST_CASE("photon energy") {
  CHECK(photon_energy_ev(660.0) == doctest::Approx(1.88).epsilon(0.01 / 1.88));
  // hc/e = 1239.84198... eV nm, so this wavelength maps to 1 eV
  CHECK(photon_energy_ev(1239.84) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(photon_energy_ev(637.0) == doctest::Approx(1.946).epsilon(0.005 / 1.946));
  CHECK_THROWS_AS(photon_energy_ev(0.0), std::domain_error);
  CHECK_THROWS_AS(photon_energy_ev(-1.0), std::domain_error);
}

TEST_CASE("rate from intensity") {
  // 1.73 mW average at 10 MHz repetition over a 6 ps square pulse -> 28.83 W peak
  const double area = 0.6e-6 * 0.6e-6;
  CHECK(rate_from_intensity(3e-24, 28.83, area, 700.0) ==
        doctest::Approx(0.85e9).epsilon(0.05));
  CHECK(rate_from_intensity(3e-24, 0.0, area, 700.0) == 0.0);
  // green absorption cross-section at CW power maps to ~17.7 MHz
  CHECK(rate_from_intensity(0.95e-20, 0.25e-3, area, 532.0) ==
        doctest::Approx(17.67e6).epsilon(0.02));
  CHECK_THROWS_AS(rate_from_intensity(0.0, 1.0, area, 700.0), std::domain_error);
  CHECK_THROWS_AS(rate_from_intensity(3e-24, 1.0, 0.0, 700.0), std::domain_error);
  CHECK_THROWS_AS(rate_from_intensity(3e-24, 1.0, area, -700.0), std::domain_error);
  CHECK_THROWS_AS(rate_from_intensity(3e-24, -1.0, area, 700.0), std::domain_error);
}

TEST_CASE("pulse rate profile") {
  PulseTrain pulses{13e9, 0.0, 6e-12, 6e-12, 100e-9, 1e-9};

  SUBCASE("disabled channel is zero everywhere") {
    PulseTrain off = pulses;
    off.eq_rate_hz = 0.0;
    for (double t : {0.0, 1e-9, 50e-9, 99e-9})
      CHECK(pulse_rate_at(off, t, PulseChannel::stimulated) == 0.0);
    CHECK(pulse_rate_at(pulses, 1e-9, PulseChannel::excitation) == 0.0);
  }

  SUBCASE("peak value at the pulse centre") {
    // peak = eq_rate * eq_width / (sigma * sqrt(2 pi)) = 13 GHz / sqrt(2 pi)
    CHECK(pulse_rate_at(pulses, 1e-9, PulseChannel::stimulated) ==
          doctest::Approx(5.18625e9).epsilon(1e-3));
    CHECK(pulse_peak_rate_hz(pulses, PulseChannel::stimulated) ==
          doctest::Approx(13e9 * 6e-12 / (6e-12 * std::sqrt(2 * M_PI))).epsilon(1e-12));
  }

  SUBCASE("pulse area equals eq_rate * eq_width") {
    // Simpson quadrature over one period as the independent check
    const double t_lo = 0.0, t_hi = pulses.period_s;
    const int n = 200000;  // even
    const double h = (t_hi - t_lo) / n;
    double sum = pulse_rate_at(pulses, t_lo, PulseChannel::stimulated) +
                 pulse_rate_at(pulses, t_hi, PulseChannel::stimulated);
    for (int i = 1; i < n; ++i)
      sum += pulse_rate_at(pulses, t_lo + i * h, PulseChannel::stimulated) *
             (i % 2 ? 4.0 : 2.0);
    const double integral = sum * h / 3.0;
    CHECK(integral == doctest::Approx(13e9 * 6e-12).epsilon(1e-6));
  }

  SUBCASE("profile repeats with the period") {
    for (double t : {0.9e-9, 1e-9, 1.01e-9})
      CHECK(pulse_rate_at(pulses, t, PulseChannel::stimulated) ==
            doctest::Approx(pulse_rate_at(pulses, t + pulses.period_s,
                                          PulseChannel::stimulated))
                .epsilon(1e-12));
  }
}

TEST_CASE("derivatives") {
  SUBCASE("ground state is stationary without drive") {
    ModelParams params;
    const Derivs d = derivatives(PopulationState{1, 0, 0}, 0.0, params);
    CHECK(d.dp1_hz == 0.0);
    CHECK(d.dp2_hz == 0.0);
    CHECK(d.dp3_hz == 0.0);
  }

  SUBCASE("hand-evaluated drive balance") {
    ModelParams params;
    params.pump.green_rate_hz = 92e6;
    const Derivs d = derivatives(PopulationState{0.5, 0.5, 0.0}, 0.0, params);
    // 0.5*92 MHz in, 0.5*(65.3+18) MHz out
    CHECK(d.dp2_hz == doctest::Approx(4.35e6).epsilon(1e-6));
  }

  SUBCASE("components sum to zero for random inputs") {
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      ModelParams params;
      params.rates.l21_hz = uni(rng) * 1e8;
      params.rates.l23_hz = uni(rng) * 1e8;
      params.rates.l31_hz = 1e11 + uni(rng) * 1e12;
      params.pump.green_rate_hz = uni(rng) * 1e9;
      params.pulses = PulseTrain{uni(rng) * 20e9, uni(rng) * 2e9, 6e-12, 6e-12,
                                 25e-9, 1e-9};
      double p1 = uni(rng), p2 = uni(rng) * (1.0 - p1);
      PopulationState state{p1, p2, 1.0 - p1 - p2};
      const double t = uni(rng) * 25e-9;
      const Derivs d = derivatives(state, t, params);
      CHECK(std::abs(d.dp1_hz + d.dp2_hz + d.dp3_hz) <=
            1e-15 * params.max_rate_hz());
    }
  }
}

TEST_CASE("analytic steady state") {
  RateConstants rates;  // paper defaults

  SUBCASE("no pump means ground state") {
    const PopulationState ss = steady_state_analytic(rates, PumpDrive{0.0});
    CHECK(ss.p1 == 1.0);
    CHECK(ss.p2 == 0.0);
    CHECK(ss.p3 == 0.0);
  }

  SUBCASE("pumped excited-state population") {
    const PopulationState ss = steady_state_analytic(rates, PumpDrive{92e6});
    CHECK(ss.p2 == doctest::Approx(0.5248).epsilon(1e-3 / 0.5248));
    CHECK(ss.p1 + ss.p2 + ss.p3 == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("derivatives vanish at the steady state") {
    for (double green : {8.8e6, 92e6, 141e6}) {
      ModelParams params;
      params.pump.green_rate_hz = green;
      const PopulationState ss = steady_state_analytic(rates, params.pump);
      const Derivs d = derivatives(ss, 0.0, params);
      const double bound = 1e-12 * params.max_rate_hz();
      CHECK(std::abs(d.dp1_hz) <= bound);
      CHECK(std::abs(d.dp2_hz) <= bound);
      CHECK(std::abs(d.dp3_hz) <= bound);
    }
  }
}

TEST_CASE("domain type validation") {
  SUBCASE("rate constants need a dominant phonon rate") {
    RateConstants bad;
    bad.l31_hz = 50e6;  // slower than l21
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    RateConstants negative;
    negative.l21_hz = -1.0;
    CHECK_THROWS_AS(negative.validate(), std::domain_error);
    CHECK_NOTHROW(RateConstants{}.validate());
  }

  SUBCASE("pulse support must fit the period") {
    PulseTrain tight{1e9, 0.0, 6e-12, 6e-12, 100e-9, 10e-12};  // t0 < 6 sigma
    CHECK_THROWS_AS(tight.validate(), std::domain_error);
    PulseTrain late{1e9, 0.0, 6e-12, 6e-12, 100e-9, 100e-9};  // support past period
    CHECK_THROWS_AS(late.validate(), std::domain_error);
    CHECK_NOTHROW(PulseTrain{1e9, 0.0, 6e-12, 6e-12, 100e-9, 1e-9}.validate());
  }

  SUBCASE("population state must be normalised") {
    CHECK_THROWS_AS((PopulationState{0.5, 0.5, 0.5}.validate()), std::domain_error);
    CHECK_THROWS_AS((PopulationState{-0.1, 0.6, 0.5}.validate()), std::domain_error);
    CHECK_NOTHROW((PopulationState{0.25, 0.5, 0.25}.validate()));
  }
}
