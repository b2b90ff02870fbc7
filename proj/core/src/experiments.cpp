#include "nvstimex/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "nvstimex/errors.hpp"

namespace nvstimex {

namespace {

double interpolate(const Trace& trace, double t_s) {
  const auto& ts = trace.times_s;
  if (ts.empty() || t_s < ts.front() - 1e-15 || t_s > ts.back() + 1e-15)
    throw std::domain_error("trace interpolation: time outside sampled range");
  const auto it = std::lower_bound(ts.begin(), ts.end(), t_s);
  if (it == ts.begin()) return trace.values.front();
  const auto hi = static_cast<std::size_t>(it - ts.begin());
  if (hi == ts.size()) return trace.values.back();
  const std::size_t lo = hi - 1;
  const double w = (t_s - ts[lo]) / (ts[hi] - ts[lo]);
  return trace.values[lo] + w * (trace.values[hi] - trace.values[lo]);
}

Trace settled_relative_trace(const ModelParams& params, int max_pulses,
                             const IntegratorControls& controls, double baseline) {
  const PulseTrainResult result = settle_pulse_train(params, max_pulses, controls);
  const double b = baseline > 0.0 ? baseline : result.baseline;
  return Trace{result.grid.times_s, relative_emission(result.grid, b)};
}

}  // namespace

SweepResult wavelength_sweep(const SpectrumCurve& spectrum, const ModelParams& base,
                             const WavelengthSweepOptions& options,
                             const IntegratorControls& controls) {
  base.validate();
  if (!base.pulses)
    throw std::domain_error("wavelength_sweep: base params carry no pulse train");
  if (options.centres_nm.empty())
    throw std::domain_error("wavelength_sweep: no centre wavelengths");
  if (!options.powers_w.empty()) {
    if (options.powers_w.size() != options.centres_nm.size())
      throw std::domain_error("wavelength_sweep: powers/centres length mismatch");
    if (!(options.reference_power_w > 0.0))
      throw std::domain_error("wavelength_sweep: reference power must be positive");
  }

  const SpectrumCurve rate_curve = rate_curve_from_spectrum(
      spectrum, options.anchor_rate_hz, options.anchor_wavelength_nm);

  std::vector<std::size_t> order(options.centres_nm.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return options.centres_nm[a] < options.centres_nm[b];
  });

  SweepResult sweep;
  sweep.axis_name = "centre_nm";
  sweep.value_name = "lambda_red_hz";
  sweep.metric_name = "min_relative_emission";
  for (std::size_t i : order) {
    const double centre = options.centres_nm[i];
    const double rate = band_average(rate_curve, centre, options.bandwidth_nm);

    ModelParams params = base;
    params.pulses->eq_rate_hz = rate;
    const Trace trace = settled_relative_trace(params, options.max_pulses, controls, 0.0);
    double metric = min_relative_emission(trace.values, options.n_avg);
    if (!options.powers_w.empty()) {
      const double reduction =
          power_rescale(1.0 - metric, options.powers_w[i], options.reference_power_w);
      metric = 1.0 - reduction;
    }

    sweep.axis.push_back(centre);
    sweep.value.push_back(rate);
    sweep.metric.push_back(metric);
    sweep.metadata.push_back(params);
  }
  return sweep;
}

double power_rescale(double reduction, double measured_power_w,
                     double reference_power_w) {
  if (!(measured_power_w > 0.0) || !(reference_power_w > 0.0))
    throw std::domain_error("power_rescale: powers must be positive");
  return reduction * (reference_power_w / measured_power_w);
}

PowerSweepResult power_sweep(const ModelParams& base,
                             const std::vector<double>& green_rates_hz,
                             int max_pulses, const IntegratorControls& controls) {
  base.validate();
  if (!base.pulses)
    throw std::domain_error("power_sweep: base params carry no pulse train");
  if (green_rates_hz.empty())
    throw std::domain_error("power_sweep: no pump rates");
  for (double rate : green_rates_hz)
    if (!(rate > 0.0))
      throw std::domain_error("power_sweep: pump rates must be positive");

  std::vector<double> rates = green_rates_hz;
  std::sort(rates.begin(), rates.end());

  PowerSweepResult result;
  for (double rate : rates) {
    ModelParams params = base;
    params.pump.green_rate_hz = rate;
    const PopulationState ss = steady_state_analytic(params.rates, params.pump);
    result.green_rates_hz.push_back(rate);
    result.traces.push_back(settled_relative_trace(params, max_pulses, controls, 0.0));
    result.baselines.push_back(ss.p2);
    result.metadata.push_back(params);
  }
  return result;
}

RecoveryFit recovery_time(const Trace& trace, double window_begin_s,
                          double window_end_s, double noise_bound) {
  if (!(window_end_s > window_begin_s))
    throw std::domain_error("recovery_time: window must be increasing");

  std::vector<double> t, v;
  for (std::size_t i = 0; i < trace.times_s.size(); ++i) {
    if (trace.times_s[i] >= window_begin_s && trace.times_s[i] <= window_end_s) {
      t.push_back(trace.times_s[i] - window_begin_s);
      v.push_back(trace.values[i]);
    }
  }
  if (t.size() < 4)
    throw FitQualityError("recovery_time: fewer than four samples in window");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] - noise_bound)
      throw FitQualityError("recovery_time: window data not monotone within noise bound");

  // Variable projection: for fixed tau the amplitude is linear least squares.
  const auto sse_at = [&](double tau, double* amplitude) {
    double se2 = 0.0, sue = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = std::exp(-t[i] / tau);
      se2 += e * e;
      sue += (1.0 - v[i]) * e;
    }
    const double a = se2 > 0.0 ? sue / se2 : 0.0;
    double sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = (1.0 - v[i]) - a * std::exp(-t[i] / tau);
      sse += r * r;
    }
    if (amplitude) *amplitude = a;
    return sse;
  };

  const double span = t.back();
  const double log_lo = std::log(span * 1e-4);
  const double log_hi = std::log(span * 50.0);

  // Coarse log scan, then golden-section refinement around the best point.
  const int n_scan = 160;
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_scan; ++i) {
    const double tau = std::exp(log_lo + (log_hi - log_lo) * i / (n_scan - 1));
    const double sse = sse_at(tau, nullptr);
    if (sse < best_sse) {
      best_sse = sse;
      best = i;
    }
  }
  const double step = (log_hi - log_lo) / (n_scan - 1);
  double a_lo = log_lo + step * std::max(best - 1, 0);
  double b_hi = log_lo + step * std::min(best + 1, n_scan - 1);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b_hi - gr * (b_hi - a_lo);
  double x2 = a_lo + gr * (b_hi - a_lo);
  double f1 = sse_at(std::exp(x1), nullptr);
  double f2 = sse_at(std::exp(x2), nullptr);
  for (int it = 0; it < 120 && b_hi - a_lo > 1e-8; ++it) {
    if (f1 < f2) {
      b_hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = b_hi - gr * (b_hi - a_lo);
      f1 = sse_at(std::exp(x1), nullptr);
    } else {
      a_lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = a_lo + gr * (b_hi - a_lo);
      f2 = sse_at(std::exp(x2), nullptr);
    }
  }

  RecoveryFit fit;
  fit.tau_s = std::exp(0.5 * (a_lo + b_hi));
  const double sse = sse_at(fit.tau_s, &fit.amplitude);
  fit.residual_rms = std::sqrt(sse / static_cast<double>(t.size()));
  if (fit.amplitude <= 10.0 * noise_bound)
    throw FitQualityError("recovery_time: no resolvable recovery amplitude");
  return fit;
}

const char* to_string(FitParameter p) {
  switch (p) {
    case FitParameter::lambda_red:
      return "lambda_red";
    case FitParameter::lambda_red2:
      return "lambda_red2";
    case FitParameter::lambda_green:
      return "lambda_green";
    case FitParameter::baseline:
      return "baseline";
  }
  return "unknown";
}

void FitProblem::validate() const {
  fixed.validate();
  if (observed.empty())
    throw std::domain_error("FitProblem: no observed traces");
  for (const Trace& trace : observed)
    if (trace.times_s.size() != trace.values.size() || trace.times_s.size() < 2)
      throw std::domain_error("FitProblem: malformed observed trace");
  if (free.empty()) throw std::domain_error("FitProblem: free set must be non-empty");
  if (bounds.size() != free.size())
    throw std::domain_error("FitProblem: bounds must align with free parameters");
  for (const auto& [lo, hi] : bounds)
    if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
      throw std::domain_error("FitProblem: bounds must be finite positive intervals");
  for (FitParameter p : free)
    if ((p == FitParameter::lambda_red || p == FitParameter::lambda_red2) && !fixed.pulses)
      throw std::domain_error("FitProblem: pulse parameters free but no pulse train");
  if (!fixed.pulses)
    throw std::domain_error("FitProblem: fixed params carry no pulse train");
}

double FitResult::value_of(FitParameter p) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == p) return values[i];
  throw std::invalid_argument("FitResult: parameter not part of the fit");
}

namespace {

// Residuals of the simulated relative emission against every observed sample.
std::vector<double> fit_residuals(const FitProblem& problem,
                                  const std::vector<double>& theta,
                                  const IntegratorControls& controls) {
  ModelParams params = problem.fixed;
  double baseline_override = 0.0;
  for (std::size_t i = 0; i < problem.free.size(); ++i) {
    switch (problem.free[i]) {
      case FitParameter::lambda_red:
        params.pulses->eq_rate_hz = theta[i];
        break;
      case FitParameter::lambda_red2:
        params.pulses->red2_rate_hz = theta[i];
        break;
      case FitParameter::lambda_green:
        params.pump.green_rate_hz = theta[i];
        break;
      case FitParameter::baseline:
        baseline_override = theta[i];
        break;
    }
  }
  const Trace sim = settled_relative_trace(params, problem.max_pulses, controls,
                                           baseline_override);
  std::vector<double> r;
  for (const Trace& obs : problem.observed)
    for (std::size_t i = 0; i < obs.times_s.size(); ++i)
      r.push_back(interpolate(sim, obs.times_s[i]) - obs.values[i]);
  return r;
}

double sse_of(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

// Gaussian elimination with partial pivoting; systems here are at most 4x4.
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0) throw std::runtime_error("singular normal equations");
    for (std::size_t row = col + 1; row < n; ++row) {
      const double f = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

FitResult make_result(const FitProblem& problem, const std::vector<double>& theta,
                      double sse, std::size_t m, int iterations, bool converged) {
  FitResult result;
  result.names = problem.free;
  result.values = theta;
  result.sse = sse;
  result.residual_rms = m ? std::sqrt(sse / static_cast<double>(m)) : 0.0;
  result.iterations = iterations;
  result.converged = converged;
  return result;
}

}  // namespace

FitResult fit_parameters(const FitProblem& problem, const IntegratorControls& controls) {
  problem.validate();
  const std::size_t n = problem.free.size();

  // Work on log-scaled parameters; all bounds are positive by contract.
  std::vector<double> z_lo(n), z_hi(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z_lo[i] = std::log(problem.bounds[i].first);
    z_hi[i] = std::log(problem.bounds[i].second);
    z[i] = 0.5 * (z_lo[i] + z_hi[i]);
  }
  const auto theta_of = [&](const std::vector<double>& zz) {
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) theta[i] = std::exp(zz[i]);
    return theta;
  };

  std::vector<double> r = fit_residuals(problem, theta_of(z), controls);
  const std::size_t m = r.size();
  double sse = sse_of(r);
  double mu = 1e-3;
  const int max_iterations = 200;

  for (int iter = 1; iter <= max_iterations; ++iter) {
    if (sse < 1e-26)
      return make_result(problem, theta_of(z), sse, m, iter, true);

    // Forward-difference Jacobian in z (switches side at the upper bound).
    const double dz = 1e-5;
    std::vector<std::vector<double>> jac(m, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> zj = z;
      const double step = (zj[j] + dz <= z_hi[j]) ? dz : -dz;
      zj[j] += step;
      const std::vector<double> rj = fit_residuals(problem, theta_of(zj), controls);
      for (std::size_t i = 0; i < m; ++i) jac[i][j] = (rj[i] - r[i]) / step;
    }

    std::vector<std::vector<double>> jtj(n, std::vector<double>(n, 0.0));
    std::vector<double> jtr(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t a = 0; a < n; ++a) {
        jtr[a] += jac[i][a] * r[i];
        for (std::size_t b = 0; b < n; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
      }
    double max_diag = 0.0;
    for (std::size_t a = 0; a < n; ++a) max_diag = std::max(max_diag, jtj[a][a]);
    const double grad_max =
        std::abs(*std::max_element(jtr.begin(), jtr.end(), [](double a, double b) {
          return std::abs(a) < std::abs(b);
        }));
    if (grad_max <= 1e-12 * std::max(1.0, sse) || max_diag == 0.0)
      return make_result(problem, theta_of(z), sse, m, iter, true);

    bool improved = false;
    while (!improved) {
      std::vector<std::vector<double>> a = jtj;
      for (std::size_t d = 0; d < n; ++d)
        a[d][d] += mu * (jtj[d][d] + 1e-12 * max_diag);
      std::vector<double> g(n);
      for (std::size_t d = 0; d < n; ++d) g[d] = -jtr[d];

      std::vector<double> dz_step;
      try {
        dz_step = solve_dense(a, g);
      } catch (const std::runtime_error&) {
        mu *= 4.0;
        continue;
      }

      std::vector<double> z_trial(n);
      double step_norm = 0.0;
      for (std::size_t d = 0; d < n; ++d) {
        z_trial[d] = std::clamp(z[d] + dz_step[d], z_lo[d], z_hi[d]);
        step_norm = std::max(step_norm, std::abs(z_trial[d] - z[d]));
      }
      if (step_norm < 1e-11)
        return make_result(problem, theta_of(z), sse, m, iter, true);

      const std::vector<double> r_trial = fit_residuals(problem, theta_of(z_trial), controls);
      const double sse_trial = sse_of(r_trial);
      if (sse_trial < sse) {
        const bool tiny_gain = (sse - sse_trial) <= 1e-13 * (sse + 1e-300);
        z = z_trial;
        r = r_trial;
        sse = sse_trial;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        if (tiny_gain)
          return make_result(problem, theta_of(z), sse, m, iter, true);
      } else {
        mu *= 4.0;
        if (mu > 1e10)
          return make_result(problem, theta_of(z), sse, m, iter, true);
      }
    }
  }
  throw FitNonConvergence("fit_parameters: iteration budget exhausted",
                          make_result(problem, theta_of(z), sse, m, max_iterations, false));
}

FitResult grid_search_fit(const FitProblem& problem, int points_per_param,
                          const IntegratorControls& controls) {
  problem.validate();
  if (points_per_param < 2)
    throw std::domain_error("grid_search_fit: need at least two points per parameter");
  const std::size_t n = problem.free.size();

  std::vector<double> best_theta;
  double best_sse = std::numeric_limits<double>::infinity();
  std::size_t m = 0;

  std::vector<int> index(n, 0);
  const auto theta_at = [&](const std::vector<int>& idx) {
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = std::log(problem.bounds[i].first);
      const double hi = std::log(problem.bounds[i].second);
      theta[i] = std::exp(lo + (hi - lo) * idx[i] / (points_per_param - 1));
    }
    return theta;
  };

  while (true) {
    const std::vector<double> theta = theta_at(index);
    const std::vector<double> r = fit_residuals(problem, theta, controls);
    m = r.size();
    const double sse = sse_of(r);
    if (sse < best_sse) {
      best_sse = sse;
      best_theta = theta;
    }
    std::size_t carry = 0;
    while (carry < n && ++index[carry] == points_per_param) {
      index[carry] = 0;
      ++carry;
    }
    if (carry == n) break;
  }
  return make_result(problem, best_theta, best_sse, m, points_per_param, true);
}

}  // namespace nvstimex
