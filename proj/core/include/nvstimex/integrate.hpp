#pragma once

#include <cstddef>
#include <vector>

#include "nvstimex/model.hpp"

namespace nvstimex {

// Error control and output sampling for the adaptive integrator.
struct IntegratorControls {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double grid_dt_s = 1e-10;           // uniform output grid (experimental time resolution)
  double pulse_dense_dt_s = 0.5e-12;  // sample/step spacing inside pulse windows
  double max_step_s = 0.0;            // 0: derived from the stiffest rate

  void validate() const;
};

// State change across one period below which a pulse train counts as settled.
inline constexpr double periodic_steady_tol = 1e-8;

// Adaptive Dormand-Prince 5(4) integration over [t_begin, t_end]. Output on
// the uniform grid plus dense samples inside every pulse window; steps never
// cross an output point, which keeps them at or below pulse_dense_dt_s while
// a pulse is active.
Trajectory integrate(const PopulationState& state0, const ModelParams& params,
                     double t_begin_s, double t_end_s,
                     const IntegratorControls& controls = {});

// Integrates the pulse-free system from |1> until all derivatives fall below
// tol times the slow relaxation rate. Throws ConvergenceError past the
// horizon bound.
PopulationState relax_to_steady(const ModelParams& params, double tol = 1e-9,
                                const IntegratorControls& controls = {});

struct PulseTrainResult {
  Trajectory dense;   // uniform grid plus in-window samples
  Trajectory grid;    // uniform grid only
  bool reached_periodic_steady = false;
  int periods = 0;
  double baseline = 0.0;  // CW steady-state emission level used for ratios
};

// Simulates n_pulses repetition periods starting from the CW analytic steady
// state. reached_periodic_steady compares the boundary states of the last two
// periods against periodic_steady_tol.
PulseTrainResult simulate_pulse_train(const ModelParams& params, int n_pulses,
                                      const IntegratorControls& controls = {});

// Runs period by period until the boundary state settles, keeping only the
// final period (times rebased to [0, period]). Throws ConvergenceError if
// max_pulses periods do not settle.
PulseTrainResult settle_pulse_train(const ModelParams& params, int max_pulses = 200,
                                    const IntegratorControls& controls = {});

// Detected-emission signal: the excited-state population along the trajectory.
std::vector<double> emission_signal(const Trajectory& traj);

// Elementwise signal / baseline. Throws std::domain_error for baseline <= 0.
std::vector<double> relative_emission(const Trajectory& traj, double baseline);

// Mean of the n_avg samples from the trace minimum onward (the experimental
// extraction of the post-pulse emission level).
double min_relative_emission(const std::vector<double>& trace, std::size_t n_avg = 10);

}  // namespace nvstimex
