#include <benchmark/benchmark.h>

#include "bagl/baselines.hpp"
#include "bagl/gibbs.hpp"
#include "bagl/portfolio.hpp"
#include "bagl/random.hpp"
#include "bagl/sim_eval.hpp"

namespace {

bagl::ScatterMatrix ar4_scatter(bagl::Index p, bagl::Index n) {
  bagl::RngStream rng(1);
  return bagl::scatter(bagl::sample_mvn_zero(rng, bagl::make_ar4_precision(p), n));
}

void BM_Sweep(benchmark::State& state) {
  const auto p = static_cast<bagl::Index>(state.range(0));
  const auto sc = ar4_scatter(p, 3);
  bagl::ChainConfig cfg;
  bagl::ChainState st = bagl::init_chain(sc, 3, cfg);
  bagl::RngStream rng(2);
  for (auto _ : state) {
    bagl::sweep(st, sc, 3, cfg, rng);
    benchmark::DoNotOptimize(st.omega);
  }
}
BENCHMARK(BM_Sweep)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_HitAndRun(benchmark::State& state) {
  const auto d = static_cast<bagl::Index>(state.range(0));
  const bagl::Matrix a = bagl::Matrix::Identity(d, d);
  const auto sampler = bagl::HitAndRunSampler::from_covariance(bagl::Vector::Zero(d), a, a, 4.0);
  bagl::RngStream rng(3);
  bagl::Vector x = bagl::Vector::Zero(d);
  for (auto _ : state) {
    x = sampler.run(rng, x, bagl::default_har_steps(d));
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_HitAndRun)->Arg(9)->Arg(49)->Arg(99);

void BM_LedoitWolf(benchmark::State& state) {
  bagl::RngStream rng(4);
  const auto panel = bagl::sample_mvn_zero(rng, bagl::make_ar4_precision(100), 120);
  for (auto _ : state) benchmark::DoNotOptimize(bagl::ledoit_wolf_covariance(panel));
}
BENCHMARK(BM_LedoitWolf);

void BM_Gmv(benchmark::State& state) {
  const auto omega = bagl::make_ar4_precision(static_cast<bagl::Index>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bagl::gmv_weights(omega));
}
BENCHMARK(BM_Gmv)->Arg(100)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
