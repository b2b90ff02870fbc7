#include "nvstimex/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nvstimex/errors.hpp"

namespace nvstimex {

namespace {

using State = std::array<double, 3>;

State eval_rhs(const ModelParams& params, double t, const State& y) {
  const PopulationState s{y[0], y[1], y[2]};
  const Derivs d = derivatives(s, t, params);
  return {d.dp1_hz, d.dp2_hz, d.dp3_hz};
}

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepOutcome {
  State y_new;
  State k_last;  // FSAL stage, reusable as the next first stage
  double err_norm;
};

StepOutcome dopri5_step(const ModelParams& params, double t, const State& y,
                        const State& k1, double h, double rel_tol, double abs_tol) {
  State y2, y3, y4, y5, y6, ynew;
  for (int i = 0; i < 3; ++i) y2[i] = y[i] + h * a21 * k1[i];
  const State k2 = eval_rhs(params, t + c2 * h, y2);
  for (int i = 0; i < 3; ++i) y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  const State k3 = eval_rhs(params, t + c3 * h, y3);
  for (int i = 0; i < 3; ++i)
    y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  const State k4 = eval_rhs(params, t + c4 * h, y4);
  for (int i = 0; i < 3; ++i)
    y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  const State k5 = eval_rhs(params, t + c5 * h, y5);
  for (int i = 0; i < 3; ++i)
    y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                        a65 * k5[i]);
  const State k6 = eval_rhs(params, t + h, y6);
  for (int i = 0; i < 3; ++i)
    ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                          b6 * k6[i]);
  const State k7 = eval_rhs(params, t + h, ynew);

  double err_sq = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);
    const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    err_sq += (e / sc) * (e / sc);
  }
  return {ynew, k7, std::sqrt(err_sq / 3.0)};
}

PopulationState to_reported_state(const State& y, double t) {
  PopulationState s{y[0], y[1], y[2]};
  for (double* p : {&s.p1, &s.p2, &s.p3}) {
    if (*p < -1e-12)
      throw IntegrationError("integrate: population fell below -1e-12", t);
    if (*p < 0.0) *p = 0.0;  // roundoff-sized negatives only
  }
  return s;
}

// Output point: time plus whether it lies on the uniform grid.
struct OutputPoint {
  double t;
  bool on_grid;
};

// Points closer than this are merged (well below the dense spacing).
constexpr double merge_tol_s = 1e-14;

std::vector<OutputPoint> merge_points(std::vector<OutputPoint> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const OutputPoint& a, const OutputPoint& b) { return a.t < b.t; });
  std::vector<OutputPoint> out;
  for (const auto& p : pts) {
    if (!out.empty() && p.t - out.back().t < merge_tol_s) {
      out.back().on_grid = out.back().on_grid || p.on_grid;
      continue;
    }
    out.push_back(p);
  }
  return out;
}

// Output times for one repetition period, as offsets from the period start:
// the uniform grid plus a dense comb across the pulse window.
std::vector<OutputPoint> period_offsets(const PulseTrain& pulses,
                                        const IntegratorControls& c) {
  std::vector<OutputPoint> pts;
  const double period = pulses.period_s;
  const auto n_grid = static_cast<long>(std::floor(period / c.grid_dt_s + 0.5e-6));
  for (long k = 0; k <= n_grid; ++k) pts.push_back({k * c.grid_dt_s, true});
  if (n_grid * c.grid_dt_s < period - merge_tol_s) pts.push_back({period, false});

  const double w0 = pulses.t0_s - pulses.window_half_width_s();
  const double w1 = pulses.t0_s + pulses.window_half_width_s();
  const auto n_dense = static_cast<long>(std::ceil((w1 - w0) / c.pulse_dense_dt_s));
  for (long j = 0; j <= n_dense; ++j)
    pts.push_back({std::min(w0 + j * c.pulse_dense_dt_s, w1), false});

  return merge_points(std::move(pts));
}

double resolved_max_step(const ModelParams& params, const IntegratorControls& c) {
  if (c.max_step_s > 0.0) return c.max_step_s;
  // Explicit-method stability cap for the stiffest (phonon) rate.
  const double stiffest = std::max({params.rates.l31_hz, params.rates.l21_hz,
                                    params.rates.l23_hz, params.pump.green_rate_hz,
                                    1.0});
  return 2.5 / stiffest;
}

class Stepper {
 public:
  Stepper(const ModelParams& params, const IntegratorControls& controls,
          double t0, const State& y0)
      : params_(params),
        controls_(controls),
        max_step_(resolved_max_step(params, controls)),
        t_(t0),
        y_(y0),
        k1_(eval_rhs(params, t0, y0)),
        h_ctrl_(max_step_) {}

  const State& state() const { return y_; }
  double time() const { return t_; }
  State current_derivs() const { return k1_; }

  // Advances to exactly t_target.
  void advance_to(double t_target) {
    int consecutive_rejects = 0;
    while (t_ < t_target) {
      const double gap = t_target - t_;
      double h = std::min(h_ctrl_, max_step_);
      bool lands = false;
      if (h >= gap * (1.0 - 1e-12)) {
        h = gap;  // stretch onto the target
        lands = true;
      } else if (h > 0.5 * gap) {
        h = 0.5 * gap;  // split so no unresolvable sliver remains
      }
      if (h < 1e-16)
        throw IntegrationError("integrate: step size underflow", t_);

      const StepOutcome step = dopri5_step(params_, t_, y_, k1_, h,
                                           controls_.rel_tol, controls_.abs_tol);
      if (step.err_norm <= 1.0) {
        t_ = lands ? t_target : t_ + h;
        y_ = step.y_new;
        k1_ = step.k_last;
        const double grow = step.err_norm == 0.0
                                ? 5.0
                                : std::clamp(0.9 * std::pow(step.err_norm, -0.2), 0.2, 5.0);
        h_ctrl_ = std::min(h * grow, max_step_);
        consecutive_rejects = 0;
      } else {
        h_ctrl_ = h * std::clamp(0.9 * std::pow(step.err_norm, -0.2), 0.1, 0.9);
        if (++consecutive_rejects > 60)
          throw IntegrationError("integrate: repeated step rejection", t_);
      }
    }
  }

 private:
  const ModelParams& params_;
  const IntegratorControls& controls_;
  double max_step_;
  double t_;
  State y_;
  State k1_;
  double h_ctrl_;
};

void record(Trajectory& traj, double t, const PopulationState& s) {
  traj.times_s.push_back(t);
  traj.states.push_back(s);
  traj.emission.push_back(s.p2);
}

}  // namespace

void IntegratorControls::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::domain_error("IntegratorControls: tolerances must be positive");
  if (!(grid_dt_s > 0.0) || !(pulse_dense_dt_s > 0.0))
    throw std::domain_error("IntegratorControls: sampling intervals must be positive");
  if (max_step_s < 0.0)
    throw std::domain_error("IntegratorControls: max_step must be non-negative");
}

Trajectory integrate(const PopulationState& state0, const ModelParams& params,
                     double t_begin_s, double t_end_s,
                     const IntegratorControls& controls) {
  params.validate();
  controls.validate();
  state0.validate();
  if (!(t_end_s > t_begin_s))
    throw std::domain_error("integrate: time span must be increasing");

  std::vector<OutputPoint> pts;
  const double span = t_end_s - t_begin_s;
  const auto n_grid = static_cast<long>(std::floor(span / controls.grid_dt_s + 0.5e-6));
  for (long k = 0; k <= n_grid; ++k)
    pts.push_back({t_begin_s + k * controls.grid_dt_s, true});
  if (t_begin_s + n_grid * controls.grid_dt_s < t_end_s - merge_tol_s)
    pts.push_back({t_end_s, false});

  if (params.pulses) {
    const PulseTrain& p = *params.pulses;
    const double half = p.window_half_width_s();
    const auto k_lo = static_cast<long>(std::floor((t_begin_s - p.t0_s) / p.period_s)) - 1;
    const auto k_hi = static_cast<long>(std::ceil((t_end_s - p.t0_s) / p.period_s)) + 1;
    for (long k = k_lo; k <= k_hi; ++k) {
      const double centre = p.t0_s + k * p.period_s;
      const auto n_dense =
          static_cast<long>(std::ceil(2.0 * half / controls.pulse_dense_dt_s));
      for (long j = 0; j <= n_dense; ++j) {
        const double t = std::min(centre - half + j * controls.pulse_dense_dt_s,
                                  centre + half);
        if (t > t_begin_s + merge_tol_s && t < t_end_s - merge_tol_s)
          pts.push_back({t, false});
      }
    }
  }
  pts = merge_points(std::move(pts));

  Trajectory traj;
  traj.times_s.reserve(pts.size());
  traj.states.reserve(pts.size());
  traj.emission.reserve(pts.size());

  Stepper stepper(params, controls, t_begin_s, {state0.p1, state0.p2, state0.p3});
  record(traj, t_begin_s, to_reported_state(stepper.state(), t_begin_s));
  for (const auto& pt : pts) {
    if (pt.t <= t_begin_s + merge_tol_s) continue;
    stepper.advance_to(pt.t);
    record(traj, pt.t, to_reported_state(stepper.state(), pt.t));
  }
  return traj;
}

PopulationState relax_to_steady(const ModelParams& params, double tol,
                                const IntegratorControls& controls) {
  params.validate();
  controls.validate();
  if (params.pulses)
    throw std::domain_error("relax_to_steady: pulse train must be inactive");
  if (!(tol > 0.0)) throw std::domain_error("relax_to_steady: tol must be positive");

  if (params.pump.green_rate_hz == 0.0) return PopulationState{1.0, 0.0, 0.0};

  // Relaxation happens at the slow eigenvalue scale of the pumped system.
  const double slow_rate =
      params.pump.green_rate_hz + params.rates.l21_hz + params.rates.l23_hz;
  const double check_dt = 0.25 / slow_rate;
  const double horizon = 80.0 / slow_rate;

  Stepper stepper(params, controls, 0.0, {1.0, 0.0, 0.0});
  for (double t = check_dt; t <= horizon + 0.5 * check_dt; t += check_dt) {
    stepper.advance_to(t);
    const State d = stepper.current_derivs();
    const double dmax = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
    if (dmax < tol * slow_rate)
      return to_reported_state(stepper.state(), stepper.time());
  }
  throw ConvergenceError("relax_to_steady: no steady state within horizon");
}

namespace {

PulseTrainResult run_pulse_train(const ModelParams& params, int max_periods,
                                 bool keep_all, bool require_settle,
                                 const IntegratorControls& controls) {
  params.validate();
  controls.validate();
  if (!params.pulses)
    throw std::domain_error("simulate_pulse_train: params carry no pulse train");
  if (max_periods < 1)
    throw std::domain_error("simulate_pulse_train: need at least one pulse");

  const PulseTrain& pulses = *params.pulses;
  const auto offsets = period_offsets(pulses, controls);
  const PopulationState ss = steady_state_analytic(params.rates, params.pump);

  PulseTrainResult result;
  result.baseline = ss.p2;

  Stepper stepper(params, controls, 0.0, {ss.p1, ss.p2, ss.p3});
  State boundary_prev = stepper.state();

  for (int p = 0; p < max_periods; ++p) {
    const double period_start = p * pulses.period_s;
    if (!keep_all) {
      result.dense = Trajectory{};
      result.grid = Trajectory{};
    }
    for (const auto& pt : offsets) {
      const double t_abs = period_start + pt.t;
      const bool is_boundary_start = pt.t <= merge_tol_s;
      if (is_boundary_start && keep_all && p > 0) continue;  // recorded as previous end
      if (!is_boundary_start) stepper.advance_to(t_abs);
      const double t_out = keep_all ? t_abs : pt.t;
      const PopulationState s = to_reported_state(stepper.state(), t_abs);
      record(result.dense, t_out, s);
      if (pt.on_grid) record(result.grid, t_out, s);
    }
    result.periods = p + 1;

    const State boundary = stepper.state();
    double diff = 0.0;
    for (int i = 0; i < 3; ++i)
      diff = std::max(diff, std::abs(boundary[i] - boundary_prev[i]));
    result.reached_periodic_steady = diff < periodic_steady_tol;
    boundary_prev = boundary;
    if (!keep_all && result.reached_periodic_steady) return result;
  }

  if (require_settle && !result.reached_periodic_steady)
    throw ConvergenceError("settle_pulse_train: no periodic steady state within pulse budget");
  return result;
}

}  // namespace

PulseTrainResult simulate_pulse_train(const ModelParams& params, int n_pulses,
                                      const IntegratorControls& controls) {
  return run_pulse_train(params, n_pulses, /*keep_all=*/true,
                         /*require_settle=*/false, controls);
}

PulseTrainResult settle_pulse_train(const ModelParams& params, int max_pulses,
                                    const IntegratorControls& controls) {
  return run_pulse_train(params, max_pulses, /*keep_all=*/false,
                         /*require_settle=*/true, controls);
}

std::vector<double> emission_signal(const Trajectory& traj) { return traj.emission; }

std::vector<double> relative_emission(const Trajectory& traj, double baseline) {
  if (!(baseline > 0.0))
    throw std::domain_error("relative_emission: baseline must be positive");
  std::vector<double> out(traj.emission.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = traj.emission[i] / baseline;
  return out;
}

double min_relative_emission(const std::vector<double>& trace, std::size_t n_avg) {
  if (n_avg == 0) throw std::domain_error("min_relative_emission: n_avg must be positive");
  if (trace.size() < n_avg)
    throw std::domain_error("min_relative_emission: trace shorter than n_avg");
  const auto it = std::min_element(trace.begin(), trace.end());
  const auto i_min = static_cast<std::size_t>(it - trace.begin());
  if (i_min + n_avg > trace.size())
    throw std::domain_error("min_relative_emission: too few samples after the minimum");
  double sum = 0.0;
  for (std::size_t i = i_min; i < i_min + n_avg; ++i) sum += trace[i];
  return sum / static_cast<double>(n_avg);
}

}  // namespace nvstimex
