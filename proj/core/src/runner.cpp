#include "nvstimex/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "nvstimex/csvio.hpp"
#include "nvstimex/errors.hpp"
#include "nvstimex/experiments.hpp"
#include "nvstimex/integrate.hpp"
#include "nvstimex/spectra.hpp"

namespace nvstimex {

namespace {

std::ofstream open_output(const RunOptions& options, const std::string& name) {
  std::filesystem::create_directories(options.out_dir);
  const std::filesystem::path path = std::filesystem::path(options.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open output file: " + path.string());
  return out;
}

std::string output_name(const ExperimentSpec& spec) {
  if (!spec.output_csv.empty()) return spec.output_csv;
  switch (spec.type) {
    case ExperimentType::steady_state:
      return "steady_state.csv";
    case ExperimentType::simulate:
      return "trace.csv";
    case ExperimentType::sweep_wavelength:
      return "sweep_wavelength.csv";
    case ExperimentType::sweep_power:
      return "sweep_power_summary.csv";
    case ExperimentType::recovery:
      return "recovery.csv";
    case ExperimentType::fit:
      return "fit.csv";
    case ExperimentType::classify:
      return "classify.csv";
  }
  return "output.csv";
}

std::vector<std::string> run_metadata(const RunConfig& config, const ModelParams& params) {
  std::vector<std::string> lines;
  lines.push_back(std::string("experiment = ") + to_string(config.experiment.type));
  for (const auto& line : params_metadata(params)) lines.push_back(line);
  lines.push_back("rel_tol = " + format_double(config.sim.rel_tol));
  lines.push_back("abs_tol = " + format_double(config.sim.abs_tol));
  lines.push_back("grid_dt_s = " + format_double(config.sim.grid_dt_s));
  lines.push_back("n_avg = " + std::to_string(config.sim.n_avg));
  lines.push_back("max_pulses = " + std::to_string(config.sim.max_pulses));
  return lines;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path);
  Trace trace;
  for (const auto& [t, v] : read_two_column_csv(in)) {
    if (!trace.times_s.empty() && t <= trace.times_s.back())
      throw ParseError("trace times must be strictly increasing: " + path);
    trace.times_s.push_back(t);
    trace.values.push_back(v);
  }
  if (trace.times_s.size() < 4)
    throw ParseError("trace file too short: " + path);
  return trace;
}

std::pair<double, double> recovery_window(const ExperimentSpec& spec,
                                          const std::optional<PulseTrain>& pulse) {
  if (spec.window_begin_s >= 0.0 && spec.window_end_s > spec.window_begin_s)
    return {spec.window_begin_s, spec.window_end_s};
  if (!pulse)
    throw ParseError(
        "recovery: explicit window required when no pulse section is given");
  return {pulse->t0_s + 1e-9, pulse->t0_s + pulse->period_s - 1e-9};
}

void do_steady_state(const RunConfig& config, const RunOptions& options,
                     std::ostream& out) {
  ModelParams params = config.model_params();
  params.pulses.reset();  // pulse-free operation by definition
  const PopulationState analytic = steady_state_analytic(params.rates, params.pump);
  const PopulationState relaxed =
      relax_to_steady(params, config.experiment.steady_tol, config.integrator_controls());
  const double diff = std::max({std::abs(analytic.p1 - relaxed.p1),
                                std::abs(analytic.p2 - relaxed.p2),
                                std::abs(analytic.p3 - relaxed.p3)});

  auto file = open_output(options, output_name(config.experiment));
  for (const auto& line : run_metadata(config, params)) file << "# " << line << "\n";
  file << "method,p1,p2,p3\n";
  file << "analytic," << format_double(analytic.p1) << "," << format_double(analytic.p2)
       << "," << format_double(analytic.p3) << "\n";
  file << "relaxed," << format_double(relaxed.p1) << "," << format_double(relaxed.p2)
       << "," << format_double(relaxed.p3) << "\n";

  out << "steady-state: P2 = " << format_double(analytic.p2)
      << " (analytic), max |analytic - relaxed| = " << format_double(diff) << "\n";
}

void do_simulate(const RunConfig& config, const RunOptions& options, std::ostream& out) {
  const ModelParams params = config.model_params();
  const PulseTrainResult result = simulate_pulse_train(
      params, config.experiment.n_pulses, config.integrator_controls());
  const std::vector<double> rel = relative_emission(result.grid, result.baseline);
  const double min_rel =
      min_relative_emission(rel, static_cast<std::size_t>(config.sim.n_avg));

  auto file = open_output(options, output_name(config.experiment));
  auto meta = run_metadata(config, params);
  meta.push_back("baseline = " + format_double(result.baseline));
  write_csv(file, meta, "time_s,relative_emission", {result.grid.times_s, rel});

  out << "simulate: min relative emission = " << format_double(min_rel) << " over "
      << result.periods << " period(s), periodic steady: "
      << (result.reached_periodic_steady ? "yes" : "no") << "\n";
}

void do_sweep_wavelength(const RunConfig& config, const RunOptions& options,
                         std::ostream& out) {
  const ExperimentSpec& spec = config.experiment;
  SpectrumCurve spectrum;
  if (spec.spectrum_csv.empty()) {
    spectrum = synthetic_nv_spectrum(spec.spectrum_resolution_nm);
  } else {
    std::ifstream in(spec.spectrum_csv);
    if (!in) throw ParseError("cannot open spectrum file: " + spec.spectrum_csv);
    spectrum = load_spectrum(in);
  }

  WavelengthSweepOptions sweep_options;
  sweep_options.centres_nm = spec.centres_nm;
  sweep_options.bandwidth_nm = spec.bandwidth_nm;
  sweep_options.anchor_rate_hz = spec.anchor_rate_hz;
  sweep_options.anchor_wavelength_nm = spec.anchor_wavelength_nm;
  sweep_options.powers_w = spec.powers_w;
  sweep_options.reference_power_w = spec.reference_power_w;
  sweep_options.n_avg = static_cast<std::size_t>(config.sim.n_avg);
  sweep_options.max_pulses = config.sim.max_pulses;

  const ModelParams params = config.model_params();
  const SweepResult sweep =
      wavelength_sweep(spectrum, params, sweep_options, config.integrator_controls());

  auto file = open_output(options, output_name(spec));
  auto meta = run_metadata(config, params);
  meta.push_back("axis = " + sweep.axis_name);
  meta.push_back("value = " + sweep.value_name);
  meta.push_back("metric = " + sweep.metric_name);
  meta.push_back("bandwidth_nm = " + format_double(spec.bandwidth_nm));
  meta.push_back("anchor_rate_hz = " + format_double(spec.anchor_rate_hz));
  meta.push_back("anchor_wavelength_nm = " + format_double(spec.anchor_wavelength_nm));
  meta.push_back("spectrum = " +
                 (spec.spectrum_csv.empty() ? std::string("synthetic") : spec.spectrum_csv));
  write_csv(file, meta, "axis,value,metric", {sweep.axis, sweep.value, sweep.metric});

  const auto it = std::min_element(sweep.metric.begin(), sweep.metric.end());
  const auto idx = static_cast<std::size_t>(it - sweep.metric.begin());
  out << "sweep-wavelength: minimum metric " << format_double(*it) << " at "
      << format_double(sweep.axis[idx]) << " nm over " << sweep.axis.size()
      << " centres\n";
}

void do_sweep_power(const RunConfig& config, const RunOptions& options,
                    std::ostream& out, std::ostream& err) {
  const ExperimentSpec& spec = config.experiment;
  const ModelParams params = config.model_params();
  const PowerSweepResult result =
      power_sweep(params, spec.green_rates_hz, config.sim.max_pulses,
                  config.integrator_controls());

  std::vector<double> minima, taus;
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    const Trace& trace = result.traces[i];
    minima.push_back(
        min_relative_emission(trace.values, static_cast<std::size_t>(config.sim.n_avg)));
    const auto window = recovery_window(spec, result.metadata[i].pulses);
    try {
      taus.push_back(recovery_time(trace, window.first, window.second).tau_s);
    } catch (const FitQualityError& e) {
      err << "warning: recovery fit skipped for green_rate_hz = "
          << format_double(result.green_rates_hz[i]) << ": " << e.what() << "\n";
      taus.push_back(std::nan(""));
    }

    std::ostringstream name;
    name << "trace_power_" << (i < 10 ? "0" : "") << i << ".csv";
    auto trace_file = open_output(options, name.str());
    auto meta = run_metadata(config, result.metadata[i]);
    meta.push_back("green_rate_hz = " + format_double(result.green_rates_hz[i]));
    meta.push_back("baseline = " + format_double(result.baselines[i]));
    write_csv(trace_file, meta, "time_s,relative_emission",
              {trace.times_s, trace.values});
  }

  auto file = open_output(options, output_name(spec));
  auto meta = run_metadata(config, params);
  meta.push_back("axis = green_rate_hz");
  meta.push_back("value = recovery_tau_s");
  meta.push_back("metric = min_relative_emission");
  write_csv(file, meta, "axis,value,metric", {result.green_rates_hz, taus, minima});

  const auto it = std::min_element(minima.begin(), minima.end());
  out << "sweep-power: " << result.green_rates_hz.size()
      << " pump rates, minimum relative emission " << format_double(*it) << "\n";
}

void do_recovery(const RunConfig& config, const RunOptions& options, std::ostream& out) {
  const ExperimentSpec& spec = config.experiment;
  const ModelParams params = config.model_params();

  Trace trace;
  if (!spec.trace_csv.empty()) {
    trace = load_trace(spec.trace_csv);
  } else {
    const PulseTrainResult result =
        settle_pulse_train(params, config.sim.max_pulses, config.integrator_controls());
    trace = Trace{result.grid.times_s, relative_emission(result.grid, result.baseline)};
  }
  const auto window = recovery_window(spec, params.pulses);
  const RecoveryFit fit = recovery_time(trace, window.first, window.second);

  auto file = open_output(options, output_name(spec));
  auto meta = run_metadata(config, params);
  meta.push_back("window_begin_s = " + format_double(window.first));
  meta.push_back("window_end_s = " + format_double(window.second));
  write_csv(file, meta, "tau_s,amplitude,residual_rms",
            {{fit.tau_s}, {fit.amplitude}, {fit.residual_rms}});

  out << "recovery: tau = " << format_double(fit.tau_s) << " s (amplitude "
      << format_double(fit.amplitude) << ", rms " << format_double(fit.residual_rms)
      << ")\n";
}

void do_fit(const RunConfig& config, const RunOptions& options, std::ostream& out) {
  const ExperimentSpec& spec = config.experiment;

  FitProblem problem;
  for (const auto& path : spec.observed_csv) problem.observed.push_back(load_trace(path));
  problem.fixed = config.model_params();
  problem.free = spec.free;
  problem.bounds = spec.bounds;
  problem.max_pulses = config.sim.max_pulses;

  const FitResult result = fit_parameters(problem, config.integrator_controls());

  auto file = open_output(options, output_name(spec));
  for (const auto& line : run_metadata(config, problem.fixed)) file << "# " << line << "\n";
  file << "parameter,value\n";
  std::ostringstream summary;
  summary << "fit:";
  for (std::size_t i = 0; i < result.names.size(); ++i) {
    const std::string name = std::string(to_string(result.names[i])) +
                             (result.names[i] == FitParameter::baseline ? "" : "_hz");
    file << name << "," << format_double(result.values[i]) << "\n";
    summary << " " << name << " = " << format_double(result.values[i]) << ",";
  }
  file << "residual_rms," << format_double(result.residual_rms) << "\n";
  summary << " residual rms = " << format_double(result.residual_rms) << " ("
          << result.iterations << " iterations)";
  out << summary.str() << "\n";
}

void do_classify(const RunConfig& config, const RunOptions& options, std::ostream& out) {
  const ExperimentSpec& spec = config.experiment;
  auto file = open_output(options, output_name(spec));
  file << "# experiment = classify\n";
  file << "wavelength_nm,regime\n";
  for (double wl : spec.wavelengths_nm)
    file << format_double(wl) << "," << to_string(classify_regime(wl)) << "\n";
  out << "classify: " << format_double(spec.wavelengths_nm.front()) << " nm -> "
      << to_string(classify_regime(spec.wavelengths_nm.front())) << "\n";
}

}  // namespace

int run(const RunConfig& config, ExperimentType subcommand, const RunOptions& options,
        std::ostream& out, std::ostream& err) {
  try {
    if (config.experiment.type != subcommand) {
      err << "error: config experiment type '" << to_string(config.experiment.type)
          << "' does not match subcommand '" << to_string(subcommand) << "'\n";
      return 1;
    }
    for (const auto& section : extraneous_sections(config))
      err << "warning: section '" << section << "' is not used by '"
          << to_string(config.experiment.type) << "'\n";

    std::ostringstream summary;
    switch (config.experiment.type) {
      case ExperimentType::steady_state:
        do_steady_state(config, options, summary);
        break;
      case ExperimentType::simulate:
        do_simulate(config, options, summary);
        break;
      case ExperimentType::sweep_wavelength:
        do_sweep_wavelength(config, options, summary);
        break;
      case ExperimentType::sweep_power:
        do_sweep_power(config, options, summary, err);
        break;
      case ExperimentType::recovery:
        do_recovery(config, options, summary);
        break;
      case ExperimentType::fit:
        do_fit(config, options, summary);
        break;
      case ExperimentType::classify:
        do_classify(config, options, summary);
        break;
    }
    if (!options.quiet) out << summary.str();
    return 0;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const FitNonConvergence& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nvstimex
