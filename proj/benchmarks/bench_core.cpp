#include <benchmark/benchmark.h>

#include "rbfvmc/hamiltonian.hpp"
#include "rbfvmc/network.hpp"
#include "rbfvmc/optimizer.hpp"
#include "rbfvmc/sampler.hpp"

using namespace rbfvmc;

namespace {

void bm_evaluate(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const RbfNetwork net = init_random(m, 1, 20, 7);
  const Configuration n = {11};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(net, n));
  }
}
BENCHMARK(bm_evaluate)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

void bm_log_derivatives(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const RbfNetwork net = init_random(m, 1, 20, 7);
  const Configuration n = {11};
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_derivatives(net, n));
  }
}
BENCHMARK(bm_log_derivatives)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

// The tilted box has a dense coupling row, the worst case for one local
// energy: n_max amplitude evaluations per call.
void bm_local_energy_box(benchmark::State& state) {
  const ModelSpec model{ParticleBox{8.0, static_cast<int>(state.range(0))}};
  const RbfNetwork net = init_random(10, 1, static_cast<int>(state.range(0)), 7);
  const Configuration n = {3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(local_energy(model, net, n));
  }
}
BENCHMARK(bm_local_energy_box)->Arg(10)->Arg(20)->Arg(40);

// One full optimizer iteration's worth of sampling, with derivatives, at the
// scale the benchmarks run (50000 samples).
void bm_sampling_pass(benchmark::State& state) {
  const ModelSpec model{Ho1d{1.0, 20}};
  const RbfNetwork net = init_random(10, 1, 20, 7);
  SamplerConfig cfg;
  cfg.n_samples = 50000;
  cfg.n_therm = 1000;
  cfg.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sampling(net, model, cfg, true));
  }
}
BENCHMARK(bm_sampling_pass)->Unit(benchmark::kMillisecond);

void bm_sr_build_solve(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  std::srand(11);
  SampleEstimates est;
  est.e_mean = -1.0;
  est.o_mean = Eigen::VectorXd::Random(p);
  est.eo_mean = Eigen::VectorXd::Random(p);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(p, p);
  est.oo_mean = a * a.transpose() + est.o_mean * est.o_mean.transpose() +
                0.1 * Eigen::MatrixXd::Identity(p, p);
  for (auto _ : state) {
    const SrSystem sys = build_sr(est);
    benchmark::DoNotOptimize(solve_update(sys, 0.01, 0.02, 1e-12));
  }
}
BENCHMARK(bm_sr_build_solve)->Arg(30)->Arg(60)->Arg(120);

}  // namespace

BENCHMARK_MAIN();
