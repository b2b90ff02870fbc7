#include <benchmark/benchmark.h>

#include "nvstimex/experiments.hpp"
#include "nvstimex/integrate.hpp"
#include "nvstimex/model.hpp"
#include "nvstimex/spectra.hpp"

namespace {

nvstimex::ModelParams pulsed_params(double green_rate_hz, double period_s) {
  nvstimex::ModelParams params;
  params.pump.green_rate_hz = green_rate_hz;
  params.pulses = nvstimex::PulseTrain{13e9, 0.85e9, 6e-12, 6e-12, period_s, 1e-9};
  return params;
}

void Derivatives(benchmark::State& state) {
  const nvstimex::ModelParams params = pulsed_params(92e6, 100e-9);
  const nvstimex::PopulationState s{0.4, 0.55, 0.05};
  double t = 0.0;
  for (auto _ : state) {
    auto d = nvstimex::derivatives(s, t, params);
    benchmark::DoNotOptimize(d);
    t += 1e-12;
  }
}
BENCHMARK(Derivatives);

void RelaxToSteady(benchmark::State& state) {
  nvstimex::ModelParams params;
  params.pump.green_rate_hz = 92e6;
  for (auto _ : state) {
    auto ss = nvstimex::relax_to_steady(params);
    benchmark::DoNotOptimize(ss);
  }
}
BENCHMARK(RelaxToSteady);

void SettlePulseTrain(benchmark::State& state) {
  const nvstimex::ModelParams params =
      pulsed_params(static_cast<double>(state.range(0)) * 1e6, 100e-9);
  for (auto _ : state) {
    auto result = nvstimex::settle_pulse_train(params, 200);
    benchmark::DoNotOptimize(result.periods);
  }
}
BENCHMARK(SettlePulseTrain)->Arg(9)->Arg(141);

void SyntheticSpectrumBandAverage(benchmark::State& state) {
  const nvstimex::SpectrumCurve curve = nvstimex::synthetic_nv_spectrum(1.0);
  const nvstimex::SpectrumCurve rate =
      nvstimex::rate_curve_from_spectrum(curve, 6e9, 682.0);
  for (auto _ : state) {
    double sum = 0.0;
    for (double centre = 640.0; centre <= 800.0; centre += 20.0)
      sum += nvstimex::band_average(rate, centre, 20.0);
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(SyntheticSpectrumBandAverage);

void SmoothRunningAverage(benchmark::State& state) {
  const nvstimex::SpectrumCurve curve =
      nvstimex::synthetic_nv_spectrum(0.1);  // 3001 samples
  for (auto _ : state) {
    auto smoothed = nvstimex::smooth_running_average(curve, 4.0);
    benchmark::DoNotOptimize(smoothed.values.back());
  }
}
BENCHMARK(SmoothRunningAverage);

}  // namespace

BENCHMARK_MAIN();
