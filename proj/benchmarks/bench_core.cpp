#include <cmath>

#include <benchmark/benchmark.h>

#include "gplab/cutoff.hpp"
#include "gplab/gp.hpp"
#include "gplab/io.hpp"
#include "gplab/manybody.hpp"
#include "gplab/twobody.hpp"

using namespace gplab;

static void BM_ZeroEnergySolve(benchmark::State& st) {
  const auto v = twobody::RadialPotential::bump(1.0, 30.0);
  const double step = 1.0 / st.range(0);
  for (auto _ : st) benchmark::DoNotOptimize(twobody::solve_zero_energy(v, 3.0, step).scattering_length);
}
BENCHMARK(BM_ZeroEnergySolve)->Arg(1000)->Arg(10000);

static void BM_GPStep(benchmark::State& st) {
  const auto g = TorusGrid::make(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const gp::GPPropagator prop(g, 1.0, 1e-3);
  auto u = gp::smooth_field(g).values;
  for (auto _ : st) {
    prop.step(u);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}
BENCHMARK(BM_GPStep)->Args({1, 256})->Args({3, 32})->Args({3, 64});

static void BM_ManyBodyStep(benchmark::State& st) {
  const auto g = TorusGrid::make(1, static_cast<int>(st.range(1)));
  const int n = static_cast<int>(st.range(0));
  const manybody::ScaledPotential v(twobody::RadialPotential::bump(0.1, 10.0), g, n);
  const manybody::ManyBodyPropagator prop(v, 1e-4);
  auto psi = manybody::product_state(gp::smooth_field(g).values, g, n).psi;
  for (auto _ : st) {
    prop.step(psi);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(psi.size()));
}
BENCHMARK(BM_ManyBodyStep)->Args({2, 64})->Args({2, 256})->Args({3, 32});

static void BM_CutoffFields(benchmark::State& st) {
  cutoff::CutoffParams p;
  p.ell = 0.05;
  p.ell1 = p.ell / 20.0;
  p.a = p.ell1 / 20.0;
  p.validate();
  const auto base = twobody::RadialPotential::bump(1.0, 10.0);
  const double a0 = twobody::solve_zero_energy(base, 4.0, 1e-3).scattering_length;
  const twobody::SofteningProfile sp(base.scaled(a0 / p.a, 3), p.ell1);
  cutoff::ConfigSampler sampler(7, p.a, p.ell, 0.5);
  const auto cfg = sampler.draw(static_cast<int>(st.range(0)), 3);
  for (auto _ : st) benchmark::DoNotOptimize(cutoff::eval_fields(cfg, p, sp).W);
}
BENCHMARK(BM_CutoffFields)->Arg(10)->Arg(50);

static void BM_CsvWrite(benchmark::State& st) {
  cli_io::CsvTable t{"bench", {"i", "x", "y"}, {}};
  for (long i = 0; i < st.range(0); ++i) t.add({static_cast<long long>(i), 1.0 / (i + 1.0), std::exp(-1e-3 * i)});
  for (auto _ : st) benchmark::DoNotOptimize(cli_io::sha256_hex(cli_io::to_csv(t)));
}
BENCHMARK(BM_CsvWrite)->Arg(10000);

BENCHMARK_MAIN();
