#include <stdexcept>

#include "doctest.h"
#include "nvstimex/config.hpp"
#include "nvstimex/errors.hpp"

using namespace nvstimex;

TEST_CASE("config defaults") {
  const RunConfig config = parse_config(R"({
    "pump": {"green_rate_hz": 92e6},
    "experiment": {"type": "steady-state"}
  })");
  CHECK(config.rates.l21_hz == 65.3e6);
  CHECK(config.rates.l23_hz == 18e6);
  CHECK(config.rates.l31_hz == 1e12);
  CHECK(config.pump.green_rate_hz == 92e6);
  CHECK_FALSE(config.pulse.has_value());
  CHECK(config.sim.rel_tol == 1e-9);
  CHECK(config.sim.n_avg == 10);
  CHECK(config.experiment.type == ExperimentType::steady_state);
}

TEST_CASE("pulse defaults") {
  const RunConfig config = parse_config(R"({
    "pump": {"green_rate_hz": 92e6},
    "pulse": {"eq_rate_hz": 13e9, "period_s": 100e-9},
    "experiment": {"type": "simulate"}
  })");
  REQUIRE(config.pulse.has_value());
  CHECK(config.pulse->sigma_t_s == 6e-12);
  CHECK(config.pulse->eq_width_s == 6e-12);
  CHECK(config.pulse->t0_s == 1e-9);
  CHECK(config.pulse->red2_rate_hz == 0.0);
}

TEST_CASE("config validation errors") {
  SUBCASE("missing experiment section") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"pump": {"green_rate_hz": 1e6}})"),
                         doctest::Contains("experiment"), ParseError);
  }

  SUBCASE("empty experiment block names the missing key") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"pump": {"green_rate_hz": 1e6}, "experiment": {}})"),
        doctest::Contains("'experiment'"), ParseError);
  }

  SUBCASE("unknown key is named") {
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"rates": {"bogus": 1}, "pump": {"green_rate_hz": 1e6},
                "experiment": {"type": "steady-state"}})"),
        doctest::Contains("rates.bogus"), ParseError);
  }

  SUBCASE("unit-suffix mismatch is diagnosed") {
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"rates": {"l21_mhz": 65.3}, "pump": {"green_rate_hz": 1e6},
                "experiment": {"type": "steady-state"}})"),
        doctest::Contains("l21_hz"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"pump": {"green_rate_khz": 92}, "experiment": {"type": "steady-state"}})"),
        doctest::Contains("green_rate_hz"), ParseError);
  }

  SUBCASE("unknown section") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"laser": {}, "experiment": {"type": "fit"}})"),
                         doctest::Contains("laser"), ParseError);
  }

  SUBCASE("unknown experiment type") {
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"type": "warp"}})"), ParseError);
  }

  SUBCASE("non-positive physical values") {
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"pump": {"green_rate_hz": 92e6},
                "pulse": {"period_s": -1e-9},
                "experiment": {"type": "simulate"}})"),
        doctest::Contains("period_s"), ParseError);
  }

  SUBCASE("pulse section requires the period") {
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"pump": {"green_rate_hz": 92e6}, "pulse": {"eq_rate_hz": 1e9},
                "experiment": {"type": "simulate"}})"),
        doctest::Contains("period_s"), ParseError);
  }

  SUBCASE("experiments demand their sections") {
    // simulate without a pulse train
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"pump": {"green_rate_hz": 92e6}, "experiment": {"type": "simulate"}})"),
        doctest::Contains("pulse"), ParseError);
    // pumped experiments without a pump
    CHECK_THROWS_WITH_AS(parse_config(R"({"experiment": {"type": "steady-state"}})"),
                         doctest::Contains("pump"), ParseError);
    // wavelength sweep without centres
    CHECK_THROWS_AS(
        parse_config(
            R"({"pump": {"green_rate_hz": 92e6},
                "pulse": {"eq_rate_hz": 13e9, "period_s": 100e-9},
                "experiment": {"type": "sweep-wavelength"}})"),
        ParseError);
  }

  SUBCASE("sweep-power defaults to the log-spaced pump ladder") {
    const RunConfig config = parse_config(
        R"({"pump": {"green_rate_hz": 92e6},
            "pulse": {"eq_rate_hz": 13e9, "period_s": 100e-9},
            "experiment": {"type": "sweep-power"}})");
    REQUIRE(config.experiment.green_rates_hz.size() == 5);
    CHECK(config.experiment.green_rates_hz.front() == doctest::Approx(8.8e6));
    CHECK(config.experiment.green_rates_hz.back() == doctest::Approx(141e6));
    // log-spaced: constant ratio between neighbours
    const double r0 =
        config.experiment.green_rates_hz[1] / config.experiment.green_rates_hz[0];
    const double r1 =
        config.experiment.green_rates_hz[4] / config.experiment.green_rates_hz[3];
    CHECK(r0 == doctest::Approx(r1).epsilon(1e-12));
  }

  SUBCASE("fit needs aligned bounds") {
    CHECK_THROWS_WITH_AS(
        parse_config(
            R"({"pump": {"green_rate_hz": 92e6},
                "pulse": {"eq_rate_hz": 13e9, "period_s": 25e-9},
                "experiment": {"type": "fit", "observed_csv": ["obs.csv"],
                               "free": ["lambda_red_hz"], "bounds": {}}})"),
        doctest::Contains("bounds"), ParseError);
    const RunConfig ok = parse_config(
        R"({"pump": {"green_rate_hz": 92e6},
            "pulse": {"eq_rate_hz": 13e9, "period_s": 25e-9},
            "experiment": {"type": "fit", "observed_csv": ["obs.csv"],
                           "free": ["lambda_red_hz"],
                           "bounds": {"lambda_red_hz": [1e9, 30e9]}}})");
    CHECK(ok.experiment.free == std::vector<FitParameter>{FitParameter::lambda_red});
    CHECK(ok.experiment.bounds[0].first == 1e9);
  }

  SUBCASE("classify needs wavelengths") {
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"type": "classify"}})"), ParseError);
  }
}

TEST_CASE("config round trips through its serialisation") {
  std::vector<std::string> documents = {
      R"({"pump": {"green_rate_hz": 92e6}, "experiment": {"type": "steady-state"}})",
      R"({"rates": {"l21_hz": 60e6, "l23_hz": 20e6, "l31_hz": 2e12},
          "pump": {"green_rate_hz": 1.41e8},
          "pulse": {"eq_rate_hz": 13e9, "red2_rate_hz": 0.85e9, "period_s": 1e-7},
          "sim": {"rel_tol": 1e-10, "n_avg": 5},
          "experiment": {"type": "sweep-power", "green_rates_hz": [8.8e6, 1.41e8]}})",
      R"({"pump": {"green_rate_hz": 92e6},
          "pulse": {"eq_rate_hz": 1e9, "period_s": 25e-9},
          "experiment": {"type": "sweep-wavelength", "centres_nm": [680, 700, 720],
                         "bandwidth_nm": 20, "powers_w": [1e-3, 1.1e-3, 0.9e-3],
                         "reference_power_w": 1e-3}})",
      R"({"experiment": {"type": "classify", "wavelengths_nm": [620, 660, 700]}})",
      R"({"pump": {"green_rate_hz": 92e6},
          "pulse": {"eq_rate_hz": 13e9, "period_s": 25e-9},
          "experiment": {"type": "fit", "observed_csv": ["a.csv", "b.csv"],
                         "free": ["lambda_red_hz", "baseline"],
                         "bounds": {"lambda_red_hz": [1e9, 30e9], "baseline": [0.1, 1.0]}}})",
      R"({"pump": {"green_rate_hz": 92e6},
          "pulse": {"eq_rate_hz": 13e9, "period_s": 1e-7},
          "experiment": {"type": "recovery", "window_begin_s": 2e-9,
                         "window_end_s": 9e-8, "output_csv": "tau.csv"}})",
  };
  for (const auto& doc : documents) {
    const RunConfig config = parse_config(doc);
    const RunConfig reparsed = parse_config(serialize_config(config));
    CHECK(reparsed == config);
  }
}

TEST_CASE("extraneous sections are reported per experiment") {
  const RunConfig classify = parse_config(
      R"({"pump": {"green_rate_hz": 92e6},
          "experiment": {"type": "classify", "wavelengths_nm": [700]}})");
  CHECK(extraneous_sections(classify) == std::vector<std::string>{"pump"});

  const RunConfig steady = parse_config(
      R"({"pump": {"green_rate_hz": 92e6},
          "pulse": {"eq_rate_hz": 1e9, "period_s": 25e-9},
          "experiment": {"type": "steady-state"}})");
  CHECK(extraneous_sections(steady) == std::vector<std::string>{"pulse"});

  const RunConfig simulate = parse_config(
      R"({"pump": {"green_rate_hz": 92e6},
          "pulse": {"eq_rate_hz": 1e9, "period_s": 25e-9},
          "experiment": {"type": "simulate"}})");
  CHECK(extraneous_sections(simulate).empty());
}

TEST_CASE("config maps onto model parameters") {
  const RunConfig config = parse_config(
      R"({"rates": {"l21_hz": 60e6},
          "pump": {"green_rate_hz": 1.41e8},
          "pulse": {"eq_rate_hz": 13e9, "period_s": 1e-7},
          "sim": {"grid_dt_s": 2e-10},
          "experiment": {"type": "simulate"}})");
  const ModelParams params = config.model_params();
  CHECK(params.rates.l21_hz == 60e6);
  CHECK(params.pump.green_rate_hz == 1.41e8);
  REQUIRE(params.pulses.has_value());
  CHECK(params.pulses->eq_rate_hz == 13e9);
  CHECK(config.integrator_controls().grid_dt_s == 2e-10);
}
