#include "nvstimex/config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "nvstimex/errors.hpp"

namespace nvstimex {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::map<std::string, ExperimentType> kTypeNames = {
    {"steady-state", ExperimentType::steady_state},
    {"simulate", ExperimentType::simulate},
    {"sweep-wavelength", ExperimentType::sweep_wavelength},
    {"sweep-power", ExperimentType::sweep_power},
    {"recovery", ExperimentType::recovery},
    {"fit", ExperimentType::fit},
    {"classify", ExperimentType::classify},
};

const std::map<std::string, FitParameter> kFitParamNames = {
    {"lambda_red_hz", FitParameter::lambda_red},
    {"lambda_red2_hz", FitParameter::lambda_red2},
    {"lambda_green_hz", FitParameter::lambda_green},
    {"baseline", FitParameter::baseline},
};

std::string fit_param_key(FitParameter p) {
  for (const auto& [name, value] : kFitParamNames)
    if (value == p) return name;
  return "unknown";
}

[[noreturn]] void fail(const std::string& msg) { throw ParseError("config: " + msg); }

// Known keys per section; used both for validation and for the unit-suffix
// mismatch diagnostic.
const std::map<std::string, std::set<std::string>> kSectionKeys = {
    {"rates", {"l21_hz", "l23_hz", "l31_hz"}},
    {"pump", {"green_rate_hz"}},
    {"pulse", {"eq_rate_hz", "red2_rate_hz", "sigma_t_s", "eq_width_s", "period_s", "t0_s"}},
    {"sim", {"rel_tol", "abs_tol", "grid_dt_s", "n_avg", "max_pulses"}},
    {"experiment",
     {"type", "steady_tol", "n_pulses", "centres_nm", "bandwidth_nm", "anchor_rate_hz",
      "anchor_wavelength_nm", "spectrum_csv", "spectrum_resolution_nm", "powers_w",
      "reference_power_w", "green_rates_hz", "trace_csv", "window_begin_s",
      "window_end_s", "observed_csv", "free", "bounds", "wavelengths_nm",
      "output_csv"}},
};

const std::set<std::string> kUnitSuffixes = {"hz", "s", "nm", "w", "m2"};

std::string stem_of(const std::string& key) {
  const auto pos = key.rfind('_');
  return pos == std::string::npos ? key : key.substr(0, pos);
}

void check_keys(const std::string& section, const json& obj) {
  const auto& known = kSectionKeys.at(section);
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (known.count(key)) continue;
    const std::string stem = stem_of(key);
    for (const auto& k : known) {
      const auto pos = k.rfind('_');
      if (pos == std::string::npos) continue;
      if (!kUnitSuffixes.count(k.substr(pos + 1))) continue;
      if (k.substr(0, pos) == stem || k.substr(0, pos) == key)
        fail("unit-suffix mismatch for key '" + section + "." + key +
             "': expected '" + k + "'");
    }
    fail("unknown key '" + section + "." + key + "'");
  }
}

double read_double(const json& obj, const std::string& section, const std::string& key,
                   double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail("key '" + section + "." + key + "' must be a number");
  return v.get<double>();
}

int read_int(const json& obj, const std::string& section, const std::string& key,
             int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail("key '" + section + "." + key + "' must be an integer");
  return v.get<int>();
}

std::string read_string(const json& obj, const std::string& section,
                        const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail("key '" + section + "." + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> read_number_array(const json& obj, const std::string& section,
                                      const std::string& key) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (!v.is_array()) fail("key '" + section + "." + key + "' must be an array");
  for (const json& item : v) {
    if (!item.is_number())
      fail("key '" + section + "." + key + "' must contain only numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

void require_positive(const std::string& path, double value) {
  if (!(value > 0.0)) fail("non-positive physical value for '" + path + "'");
}

void require_non_negative(const std::string& path, double value) {
  if (value < 0.0) fail("negative physical value for '" + path + "'");
}

}  // namespace

const char* to_string(ExperimentType type) {
  for (const auto& [name, value] : kTypeNames)
    if (value == type) return name.c_str();
  return "unknown";
}

std::optional<ExperimentType> experiment_type_from(const std::string& name) {
  const auto it = kTypeNames.find(name);
  if (it == kTypeNames.end()) return std::nullopt;
  return it->second;
}

ModelParams RunConfig::model_params() const {
  ModelParams params;
  params.rates = rates;
  params.pump = pump;
  params.pulses = pulse;
  return params;
}

IntegratorControls RunConfig::integrator_controls() const {
  IntegratorControls controls;
  controls.rel_tol = sim.rel_tol;
  controls.abs_tol = sim.abs_tol;
  controls.grid_dt_s = sim.grid_dt_s;
  return controls;
}

RunConfig parse_config(const std::string& document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("top level must be an object");

  for (const auto& [key, value] : root.items()) {
    (void)value;
    if (!kSectionKeys.count(key)) fail("unknown section '" + key + "'");
  }

  RunConfig config;

  if (root.contains("rates")) {
    config.rates_given = true;
    const json& sec = root.at("rates");
    if (!sec.is_object()) fail("section 'rates' must be an object");
    check_keys("rates", sec);
    config.rates.l21_hz = read_double(sec, "rates", "l21_hz", config.rates.l21_hz);
    config.rates.l23_hz = read_double(sec, "rates", "l23_hz", config.rates.l23_hz);
    config.rates.l31_hz = read_double(sec, "rates", "l31_hz", config.rates.l31_hz);
    require_non_negative("rates.l21_hz", config.rates.l21_hz);
    require_non_negative("rates.l23_hz", config.rates.l23_hz);
    require_positive("rates.l31_hz", config.rates.l31_hz);
  }

  if (root.contains("pump")) {
    config.pump_given = true;
    const json& sec = root.at("pump");
    if (!sec.is_object()) fail("section 'pump' must be an object");
    check_keys("pump", sec);
    config.pump.green_rate_hz =
        read_double(sec, "pump", "green_rate_hz", config.pump.green_rate_hz);
    require_non_negative("pump.green_rate_hz", config.pump.green_rate_hz);
  }

  if (root.contains("pulse")) {
    const json& sec = root.at("pulse");
    if (!sec.is_object()) fail("section 'pulse' must be an object");
    check_keys("pulse", sec);
    PulseTrain pulse;
    if (!sec.contains("period_s")) fail("missing required key 'pulse.period_s'");
    pulse.period_s = read_double(sec, "pulse", "period_s", 0.0);
    pulse.eq_rate_hz = read_double(sec, "pulse", "eq_rate_hz", 0.0);
    pulse.red2_rate_hz = read_double(sec, "pulse", "red2_rate_hz", 0.0);
    pulse.sigma_t_s = read_double(sec, "pulse", "sigma_t_s", pulse.sigma_t_s);
    pulse.eq_width_s = read_double(sec, "pulse", "eq_width_s", pulse.eq_width_s);
    pulse.t0_s = read_double(sec, "pulse", "t0_s", pulse.t0_s);
    require_positive("pulse.period_s", pulse.period_s);
    require_positive("pulse.sigma_t_s", pulse.sigma_t_s);
    require_positive("pulse.eq_width_s", pulse.eq_width_s);
    require_non_negative("pulse.eq_rate_hz", pulse.eq_rate_hz);
    require_non_negative("pulse.red2_rate_hz", pulse.red2_rate_hz);
    require_non_negative("pulse.t0_s", pulse.t0_s);
    try {
      pulse.validate();
    } catch (const std::domain_error& e) {
      fail(e.what());
    }
    config.pulse = pulse;
  }

  if (root.contains("sim")) {
    config.sim_given = true;
    const json& sec = root.at("sim");
    if (!sec.is_object()) fail("section 'sim' must be an object");
    check_keys("sim", sec);
    config.sim.rel_tol = read_double(sec, "sim", "rel_tol", config.sim.rel_tol);
    config.sim.abs_tol = read_double(sec, "sim", "abs_tol", config.sim.abs_tol);
    config.sim.grid_dt_s = read_double(sec, "sim", "grid_dt_s", config.sim.grid_dt_s);
    config.sim.n_avg = read_int(sec, "sim", "n_avg", config.sim.n_avg);
    config.sim.max_pulses = read_int(sec, "sim", "max_pulses", config.sim.max_pulses);
    require_positive("sim.rel_tol", config.sim.rel_tol);
    require_positive("sim.abs_tol", config.sim.abs_tol);
    require_positive("sim.grid_dt_s", config.sim.grid_dt_s);
    if (config.sim.n_avg < 1) fail("'sim.n_avg' must be at least 1");
    if (config.sim.max_pulses < 1) fail("'sim.max_pulses' must be at least 1");
  }

  if (!root.contains("experiment")) fail("missing required section 'experiment'");
  const json& exp = root.at("experiment");
  if (!exp.is_object()) fail("section 'experiment' must be an object");
  check_keys("experiment", exp);
  if (!exp.contains("type"))
    fail("section 'experiment' is missing required key 'type'");
  const std::string type_name = read_string(exp, "experiment", "type", "");
  const auto type = experiment_type_from(type_name);
  if (!type) fail("unknown experiment type '" + type_name + "'");
  ExperimentSpec& spec = config.experiment;
  spec.type = *type;

  spec.steady_tol = read_double(exp, "experiment", "steady_tol", spec.steady_tol);
  spec.n_pulses = read_int(exp, "experiment", "n_pulses", spec.n_pulses);
  spec.centres_nm = read_number_array(exp, "experiment", "centres_nm");
  spec.bandwidth_nm = read_double(exp, "experiment", "bandwidth_nm", spec.bandwidth_nm);
  spec.anchor_rate_hz = read_double(exp, "experiment", "anchor_rate_hz", spec.anchor_rate_hz);
  spec.anchor_wavelength_nm =
      read_double(exp, "experiment", "anchor_wavelength_nm", spec.anchor_wavelength_nm);
  spec.spectrum_csv = read_string(exp, "experiment", "spectrum_csv", "");
  spec.spectrum_resolution_nm = read_double(exp, "experiment", "spectrum_resolution_nm",
                                            spec.spectrum_resolution_nm);
  spec.powers_w = read_number_array(exp, "experiment", "powers_w");
  spec.reference_power_w =
      read_double(exp, "experiment", "reference_power_w", spec.reference_power_w);
  spec.green_rates_hz = read_number_array(exp, "experiment", "green_rates_hz");
  spec.trace_csv = read_string(exp, "experiment", "trace_csv", "");
  spec.window_begin_s = read_double(exp, "experiment", "window_begin_s", spec.window_begin_s);
  spec.window_end_s = read_double(exp, "experiment", "window_end_s", spec.window_end_s);
  spec.observed_csv.clear();
  if (exp.contains("observed_csv")) {
    const json& v = exp.at("observed_csv");
    if (!v.is_array()) fail("key 'experiment.observed_csv' must be an array");
    for (const json& item : v) {
      if (!item.is_string()) fail("key 'experiment.observed_csv' must contain strings");
      spec.observed_csv.push_back(item.get<std::string>());
    }
  }
  if (exp.contains("free")) {
    const json& v = exp.at("free");
    if (!v.is_array()) fail("key 'experiment.free' must be an array");
    for (const json& item : v) {
      if (!item.is_string()) fail("key 'experiment.free' must contain strings");
      const auto it = kFitParamNames.find(item.get<std::string>());
      if (it == kFitParamNames.end())
        fail("unknown fit parameter '" + item.get<std::string>() + "'");
      spec.free.push_back(it->second);
    }
  }
  if (exp.contains("bounds")) {
    const json& v = exp.at("bounds");
    if (!v.is_object()) fail("key 'experiment.bounds' must be an object");
    for (const auto& [key, value] : v.items()) {
      if (!kFitParamNames.count(key)) fail("unknown fit parameter in bounds: '" + key + "'");
      if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
          !value[1].is_number())
        fail("bounds for '" + key + "' must be a [low, high] number pair");
    }
    spec.bounds.clear();
    for (const FitParameter p : spec.free) {
      const std::string key = fit_param_key(p);
      if (!v.contains(key)) fail("missing bounds for free parameter '" + key + "'");
      const double lo = v.at(key)[0].get<double>();
      const double hi = v.at(key)[1].get<double>();
      require_positive("experiment.bounds." + key, lo);
      if (!(hi > lo)) fail("bounds for '" + key + "' must satisfy low < high");
      spec.bounds.emplace_back(lo, hi);
    }
  }
  spec.wavelengths_nm = read_number_array(exp, "experiment", "wavelengths_nm");
  spec.output_csv = read_string(exp, "experiment", "output_csv", "");

  for (double wl : spec.centres_nm) require_positive("experiment.centres_nm", wl);
  for (double wl : spec.wavelengths_nm) require_positive("experiment.wavelengths_nm", wl);
  for (double p : spec.powers_w) require_positive("experiment.powers_w", p);
  for (double g : spec.green_rates_hz) require_positive("experiment.green_rates_hz", g);
  require_positive("experiment.bandwidth_nm", spec.bandwidth_nm);
  require_non_negative("experiment.anchor_rate_hz", spec.anchor_rate_hz);
  require_positive("experiment.anchor_wavelength_nm", spec.anchor_wavelength_nm);
  require_positive("experiment.spectrum_resolution_nm", spec.spectrum_resolution_nm);
  require_positive("experiment.steady_tol", spec.steady_tol);
  if (spec.n_pulses < 1) fail("'experiment.n_pulses' must be at least 1");

  // Per-type required inputs.
  const bool needs_pump = spec.type != ExperimentType::classify;
  if (needs_pump && !config.pump_given)
    fail("missing required section 'pump' for experiment '" + type_name + "'");
  const bool needs_pulse =
      spec.type == ExperimentType::simulate || spec.type == ExperimentType::sweep_wavelength ||
      spec.type == ExperimentType::sweep_power || spec.type == ExperimentType::fit ||
      (spec.type == ExperimentType::recovery && spec.trace_csv.empty());
  if (needs_pulse && !config.pulse)
    fail("missing required section 'pulse' for experiment '" + type_name + "'");
  switch (spec.type) {
    case ExperimentType::sweep_wavelength:
      if (spec.centres_nm.empty())
        fail("experiment 'sweep-wavelength' requires 'centres_nm'");
      if (!spec.powers_w.empty()) {
        if (spec.powers_w.size() != spec.centres_nm.size())
          fail("'powers_w' must match 'centres_nm' in length");
        require_positive("experiment.reference_power_w", spec.reference_power_w);
      }
      break;
    case ExperimentType::sweep_power:
      if (spec.green_rates_hz.empty()) {
        // default pump ladder: five log-spaced rates from 8.8 to 141 MHz
        for (int k = 0; k < 5; ++k)
          spec.green_rates_hz.push_back(8.8e6 *
                                        std::pow(141.0 / 8.8, k / 4.0));
      }
      break;
    case ExperimentType::fit:
      if (spec.observed_csv.empty()) fail("experiment 'fit' requires 'observed_csv'");
      if (spec.free.empty()) fail("experiment 'fit' requires 'free'");
      if (spec.bounds.size() != spec.free.size())
        fail("experiment 'fit' requires bounds for every free parameter");
      break;
    case ExperimentType::classify:
      if (spec.wavelengths_nm.empty())
        fail("experiment 'classify' requires 'wavelengths_nm'");
      break;
    case ExperimentType::recovery:
      if (spec.window_begin_s >= 0.0 || spec.window_end_s >= 0.0) {
        if (!(spec.window_end_s > spec.window_begin_s) || spec.window_begin_s < 0.0)
          fail("recovery window must satisfy 0 <= window_begin_s < window_end_s");
      }
      break;
    default:
      break;
  }

  try {
    config.rates.validate();
    config.pump.validate();
  } catch (const std::domain_error& e) {
    fail(e.what());
  }
  return config;
}

std::string serialize_config(const RunConfig& config) {
  ordered_json j;
  if (config.rates_given) {
    j["rates"] = {{"l21_hz", config.rates.l21_hz},
                  {"l23_hz", config.rates.l23_hz},
                  {"l31_hz", config.rates.l31_hz}};
  }
  if (config.pump_given) {
    j["pump"] = {{"green_rate_hz", config.pump.green_rate_hz}};
  }
  if (config.pulse) {
    j["pulse"] = {{"eq_rate_hz", config.pulse->eq_rate_hz},
                  {"red2_rate_hz", config.pulse->red2_rate_hz},
                  {"sigma_t_s", config.pulse->sigma_t_s},
                  {"eq_width_s", config.pulse->eq_width_s},
                  {"period_s", config.pulse->period_s},
                  {"t0_s", config.pulse->t0_s}};
  }
  if (config.sim_given) {
    j["sim"] = {{"rel_tol", config.sim.rel_tol},
                {"abs_tol", config.sim.abs_tol},
                {"grid_dt_s", config.sim.grid_dt_s},
                {"n_avg", config.sim.n_avg},
                {"max_pulses", config.sim.max_pulses}};
  }

  // Every experiment field is emitted so that parsing the document restores
  // the exact value, whatever the type.
  ordered_json exp;
  const ExperimentSpec& spec = config.experiment;
  exp["type"] = to_string(spec.type);
  exp["steady_tol"] = spec.steady_tol;
  exp["n_pulses"] = spec.n_pulses;
  if (!spec.centres_nm.empty()) exp["centres_nm"] = spec.centres_nm;
  exp["bandwidth_nm"] = spec.bandwidth_nm;
  exp["anchor_rate_hz"] = spec.anchor_rate_hz;
  exp["anchor_wavelength_nm"] = spec.anchor_wavelength_nm;
  if (!spec.spectrum_csv.empty()) exp["spectrum_csv"] = spec.spectrum_csv;
  exp["spectrum_resolution_nm"] = spec.spectrum_resolution_nm;
  if (!spec.powers_w.empty()) exp["powers_w"] = spec.powers_w;
  if (spec.reference_power_w > 0.0) exp["reference_power_w"] = spec.reference_power_w;
  if (!spec.green_rates_hz.empty()) exp["green_rates_hz"] = spec.green_rates_hz;
  if (!spec.trace_csv.empty()) exp["trace_csv"] = spec.trace_csv;
  if (spec.window_begin_s >= 0.0) exp["window_begin_s"] = spec.window_begin_s;
  if (spec.window_end_s >= 0.0) exp["window_end_s"] = spec.window_end_s;
  if (!spec.observed_csv.empty()) exp["observed_csv"] = spec.observed_csv;
  if (!spec.free.empty()) {
    ordered_json free = ordered_json::array();
    ordered_json bounds = ordered_json::object();
    for (std::size_t i = 0; i < spec.free.size(); ++i) {
      const std::string key = fit_param_key(spec.free[i]);
      free.push_back(key);
      bounds[key] = {spec.bounds[i].first, spec.bounds[i].second};
    }
    exp["free"] = free;
    exp["bounds"] = bounds;
  }
  if (!spec.wavelengths_nm.empty()) exp["wavelengths_nm"] = spec.wavelengths_nm;
  if (!spec.output_csv.empty()) exp["output_csv"] = spec.output_csv;
  j["experiment"] = exp;
  return j.dump(2) + "\n";
}

std::vector<std::string> extraneous_sections(const RunConfig& config) {
  std::vector<std::string> extra;
  const ExperimentType type = config.experiment.type;
  const bool uses_pulse = type == ExperimentType::simulate ||
                          type == ExperimentType::sweep_wavelength ||
                          type == ExperimentType::sweep_power ||
                          type == ExperimentType::fit || type == ExperimentType::recovery;
  if (type == ExperimentType::classify) {
    if (config.rates_given) extra.push_back("rates");
    if (config.pump_given) extra.push_back("pump");
    if (config.pulse) extra.push_back("pulse");
    if (config.sim_given) extra.push_back("sim");
  } else if (!uses_pulse && config.pulse) {
    extra.push_back("pulse");
  }
  return extra;
}

}  // namespace nvstimex
