#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvstimex/integrate.hpp"
#include "nvstimex/model.hpp"
#include "nvstimex/spectra.hpp"

namespace nvstimex {

// A sampled relative-emission time series (one repetition period).
struct Trace {
  std::vector<double> times_s;
  std::vector<double> values;

  bool operator==(const Trace&) const = default;
};

// Sweep output: one metric per axis point, with the full parameter set that
// produced it.
struct SweepResult {
  std::string axis_name;
  std::string value_name;
  std::string metric_name;
  std::vector<double> axis;
  std::vector<double> value;   // intermediate quantity (rate, time constant)
  std::vector<double> metric;  // min relative emission
  std::vector<ModelParams> metadata;
};

struct WavelengthSweepOptions {
  std::vector<double> centres_nm;
  double bandwidth_nm = 20.0;
  double anchor_rate_hz = 6e9;
  double anchor_wavelength_nm = 682.0;
  // Optional per-centre measured powers; reductions are rescaled to
  // reference_power_w when supplied.
  std::vector<double> powers_w;
  double reference_power_w = 0.0;
  std::size_t n_avg = 10;
  int max_pulses = 200;
};

// For each centre wavelength: band-average the rate curve over the pulse
// bandwidth, run the pulse train to its periodic steady state and record the
// post-pulse emission level. Results are ordered by centre wavelength.
SweepResult wavelength_sweep(const SpectrumCurve& spectrum, const ModelParams& base,
                             const WavelengthSweepOptions& options,
                             const IntegratorControls& controls = {});

// Linear small-signal power normalisation of an emission reduction.
double power_rescale(double reduction, double measured_power_w,
                     double reference_power_w);

struct PowerSweepResult {
  std::vector<double> green_rates_hz;
  std::vector<Trace> traces;      // settled final period, uniform grid
  std::vector<double> baselines;  // CW steady-state emission per rate
  std::vector<ModelParams> metadata;
};

// One settled relative-emission trace per pump rate, each normalised to its
// own CW baseline.
PowerSweepResult power_sweep(const ModelParams& base,
                             const std::vector<double>& green_rates_hz,
                             int max_pulses = 200,
                             const IntegratorControls& controls = {});

struct RecoveryFit {
  double tau_s = 0.0;
  double amplitude = 0.0;
  double residual_rms = 0.0;
};

// Least-squares fit of r(t) = 1 - a*exp(-(t - t_begin)/tau) over the window.
// Throws FitQualityError when the window is non-monotone beyond noise_bound
// or carries no resolvable recovery.
RecoveryFit recovery_time(const Trace& trace, double window_begin_s,
                          double window_end_s, double noise_bound = 1e-6);

enum class FitParameter { lambda_red, lambda_red2, lambda_green, baseline };

const char* to_string(FitParameter p);

struct FitProblem {
  std::vector<Trace> observed;  // times within one repetition period
  ModelParams fixed;
  std::vector<FitParameter> free;                 // non-empty
  std::vector<std::pair<double, double>> bounds;  // aligned with free, positive
  int max_pulses = 200;

  void validate() const;
};

struct FitResult {
  std::vector<FitParameter> names;
  std::vector<double> values;
  double sse = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;

  double value_of(FitParameter p) const;
};

// Box-constrained least squares over the free parameters (Levenberg-Marquardt
// on log-scaled parameters, numerically differentiated). Deterministic.
// Throws FitNonConvergence (carrying best-so-far) past the iteration budget.
FitResult fit_parameters(const FitProblem& problem,
                         const IntegratorControls& controls = {});

// Exhaustive log-spaced grid search over the same objective; the reference
// oracle for fit_parameters.
FitResult grid_search_fit(const FitProblem& problem, int points_per_param = 200,
                          const IntegratorControls& controls = {});

// Optimizer failed to converge; carries the best point reached.
class FitNonConvergence : public std::runtime_error {
 public:
  FitNonConvergence(const std::string& msg, FitResult best)
      : std::runtime_error(msg), best_(std::move(best)) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

}  // namespace nvstimex
