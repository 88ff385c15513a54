// Microbenchmarks for the hot paths: the selective scan, ZOH discretization,
// one full block forward, and a complete reverse-diffusion sample.

#include <benchmark/benchmark.h>

#include "dispo/model.hpp"
#include "dispo/ops.hpp"
#include "dispo/rng.hpp"
#include "dispo/sampler.hpp"
#include "dispo/ssm.hpp"

using namespace dispo;

namespace {

Tensor rand_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

DiSPoConfig bench_model_config() {
  DiSPoConfig cfg;
  cfg.d_model = 64;
  cfg.n_state = 16;
  cfg.n_block = 4;
  cfg.t_obs = 2;
  cfg.t_act = 5;
  cfg.diffusion_steps = 25;
  cfg.d_obs = 7;
  cfg.d_act = 2;
  return cfg;
}

}  // namespace

static void BM_SelectiveScan(benchmark::State& state) {
  int L = static_cast<int>(state.range(0));
  const int D = 128, N = 16;
  Rng rng(1);
  Tensor abar = rand_tensor({L, D, N}, rng, 0.0, 0.95);
  Tensor bbar = rand_tensor({L, D, N}, rng);
  Tensor c = rand_tensor({L, N}, rng);
  Tensor u = rand_tensor({L, D}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::selective_scan(abar, bbar, c, u));
  }
}
BENCHMARK(BM_SelectiveScan)->Arg(8)->Arg(64);

static void BM_ZohDiscretize(benchmark::State& state) {
  int L = static_cast<int>(state.range(0));
  const int D = 128, N = 16;
  Rng rng(2);
  Tensor a = rand_tensor({D, N}, rng, -3.0, -0.05);
  Tensor b = rand_tensor({L, N}, rng);
  Tensor delta = rand_tensor({L, D}, rng, 0.01, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ops::zoh_discretize(a, b, delta));
  }
}
BENCHMARK(BM_ZohDiscretize)->Arg(8)->Arg(64);

static void BM_BlockForward(benchmark::State& state) {
  Rng rng(3);
  MambaRBlockParams blk = MambaRBlockParams::init(64, 128, 16, 4, rng);
  StepScaleSequence r = StepScaleSequence::ones(2, 5);
  Tensor u = rand_tensor({8, 64}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mamba_r_forward(u, r, blk));
  }
}
BENCHMARK(BM_BlockForward);

static void BM_DdpmSample(benchmark::State& state) {
  Rng init(4);
  DiSPoModel model = DiSPoModel::init(bench_model_config(), init);
  StepScaleSequence r = StepScaleSequence::ones(2, 5);
  Rng obs_rng(5);
  Tensor obs = rand_tensor({2, 7}, obs_rng, -1.0, 0.0);
  Rng rng(6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ddpm_sample(obs, r, model, rng));
  }
}
BENCHMARK(BM_DdpmSample);

BENCHMARK_MAIN();
