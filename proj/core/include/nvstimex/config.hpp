#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvstimex/experiments.hpp"
#include "nvstimex/model.hpp"

namespace nvstimex {

enum class ExperimentType {
  steady_state,
  simulate,
  sweep_wavelength,
  sweep_power,
  recovery,
  fit,
  classify,
};

const char* to_string(ExperimentType type);
std::optional<ExperimentType> experiment_type_from(const std::string& name);

struct SimSettings {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double grid_dt_s = 1e-10;
  int n_avg = 10;
  int max_pulses = 200;

  bool operator==(const SimSettings&) const = default;
};

// Experiment-specific settings. Only the fields of the selected type are
// consulted; the rest keep their defaults.
struct ExperimentSpec {
  ExperimentType type = ExperimentType::steady_state;

  double steady_tol = 1e-9;  // steady-state

  int n_pulses = 1;  // simulate

  std::vector<double> centres_nm;  // sweep-wavelength
  double bandwidth_nm = 20.0;
  double anchor_rate_hz = 6e9;
  double anchor_wavelength_nm = 682.0;
  std::string spectrum_csv;  // empty: synthetic spectrum
  double spectrum_resolution_nm = 1.0;
  std::vector<double> powers_w;
  double reference_power_w = 0.0;

  std::vector<double> green_rates_hz;  // sweep-power

  std::string trace_csv;  // recovery (empty: simulate from config)
  double window_begin_s = -1.0;  // -1: default window
  double window_end_s = -1.0;

  std::vector<std::string> observed_csv;  // fit
  std::vector<FitParameter> free;
  std::vector<std::pair<double, double>> bounds;

  std::vector<double> wavelengths_nm;  // classify

  std::string output_csv;  // empty: per-type default name

  bool operator==(const ExperimentSpec&) const = default;
};

// Fully describes one run. Section presence is tracked so a document can be
// reproduced exactly and unused sections can be reported.
struct RunConfig {
  RateConstants rates;
  PumpDrive pump;
  std::optional<PulseTrain> pulse;
  SimSettings sim;
  ExperimentSpec experiment;

  bool rates_given = false;
  bool pump_given = false;
  bool sim_given = false;

  ModelParams model_params() const;
  IntegratorControls integrator_controls() const;

  bool operator==(const RunConfig&) const = default;
};

// Parses a JSON config document. Unknown keys, unit-suffix mismatches,
// missing required keys and non-positive physical values raise ParseError.
RunConfig parse_config(const std::string& document);

// Canonical JSON text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

// Sections present in the config but not consulted by the experiment type.
std::vector<std::string> extraneous_sections(const RunConfig& config);

}  // namespace nvstimex
