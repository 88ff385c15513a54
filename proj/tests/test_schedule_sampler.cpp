#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "dispo/sampler.hpp"
#include "support/testutil.hpp"

using namespace dispo;
using testutil::rand_tensor;
using testutil::tiny_config;

TEST_CASE("squared-cosine schedule invariants") {
  for (int K : {10, 25, 100}) {
    NoiseSchedule s = NoiseSchedule::squared_cosine(K);
    REQUIRE(s.steps == K);
    CHECK(s.alpha_bar[0] == 1.0);
    CHECK(s.sigma2[1] == 0.0);
    for (int k = 1; k <= K; ++k) {
      CHECK(s.alpha[k] > 0.0);
      CHECK(s.alpha[k] < 1.0);
      CHECK(s.beta[k] <= 0.999);
      CHECK(s.beta[k] == doctest::Approx(1.0 - s.alpha[k]).epsilon(1e-12));
      CHECK(s.alpha_bar[k] < s.alpha_bar[k - 1]);
      // alpha_bar recomputed as the running product after the beta cap.
      CHECK(s.alpha_bar[k] == doctest::Approx(s.alpha_bar[k - 1] * s.alpha[k]).epsilon(1e-12));
      if (k > 1) {
        double want = s.beta[k] * (1.0 - s.alpha_bar[k - 1]) / (1.0 - s.alpha_bar[k]);
        CHECK(s.sigma2[k] == doctest::Approx(want).epsilon(1e-12));
      }
    }
    CHECK(s.alpha_bar[K] <= 0.01);
  }
  CHECK_THROWS(NoiseSchedule::make("linear", 10));
}

TEST_CASE("forward-process pair mixes signal and noise with unit total variance") {
  NoiseSchedule s = NoiseSchedule::squared_cosine(25);
  Rng rng(3);
  Tensor a0 = rand_tensor({4, 2}, rng);
  NoisedPair p = ddpm_training_pair(a0, 10, s, rng);
  REQUIRE(p.a_k.shape() == a0.shape());
  REQUIRE(p.eps.shape() == a0.shape());
  double c_sig = std::sqrt(s.alpha_bar[10]);
  double c_noise = std::sqrt(1.0 - s.alpha_bar[10]);
  CHECK(c_sig * c_sig + c_noise * c_noise == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 8; ++i)
    CHECK(p.a_k.at(i) == doctest::Approx(c_sig * a0.at(i) + c_noise * p.eps.at(i)).epsilon(1e-12));
  CHECK_THROWS(ddpm_training_pair(a0, 0, s, rng));
  CHECK_THROWS(ddpm_training_pair(a0, 26, s, rng));
}

TEST_CASE("noise magnitude saturates at the final step") {
  // At k = K essentially all signal is destroyed, so a zero a0 acquires
  // near-unit sample variance.
  NoiseSchedule s = NoiseSchedule::squared_cosine(25);
  Rng rng(5);
  Tensor a0 = Tensor::zeros({512});
  NoisedPair p = ddpm_training_pair(a0, 25, s, rng);
  double var = 0.0;
  for (double v : p.a_k.values()) var += v * v;
  var /= 512;
  CHECK(var == doctest::Approx(1.0 - s.alpha_bar[25]).epsilon(0.15));
  CHECK(1.0 - s.alpha_bar[25] > 0.99);
}

TEST_CASE("K=1 sampling with a zero predictor returns the scaled initial draw") {
  DiSPoConfig cfg = tiny_config();
  cfg.diffusion_steps = 1;
  Rng init_rng(7);
  DiSPoModel m = DiSPoModel::init(cfg, init_rng);
  for (auto& v : m.head_w.values()) v = 0.0;
  for (auto& v : m.head_b.values()) v = 0.0;

  Rng sample_rng(11);
  Tensor obs = rand_tensor({cfg.t_obs, cfg.d_obs}, sample_rng, -1.0, 0.0);
  StepScaleSequence r = StepScaleSequence::ones(cfg.t_obs, cfg.t_act);
  Rng noise_rng(13);
  Tensor out = ddpm_sample(obs, r, m, noise_rng);
  REQUIRE(out.shape() == Shape{cfg.t_act, cfg.d_act});

  // Replay the same rng stream: the initial window draw comes first, and the
  // single k=1 step is noise-free, so out = clip(init / sqrt(alpha_1)).
  Rng replay(13);
  std::vector<double> init = replay.normal_vec(static_cast<size_t>(cfg.t_act) * cfg.d_act);
  double inv = 1.0 / std::sqrt(m.schedule.alpha[1]);
  for (int i = 0; i < cfg.t_act * cfg.d_act; ++i) {
    double want = std::clamp(init[static_cast<size_t>(i)] * inv, -1.0, 1.0);
    CHECK(out.at(i) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("sampled windows stay inside [-1,1] normalized bounds") {
  DiSPoConfig cfg = tiny_config();
  Rng init_rng(17);
  DiSPoModel m = DiSPoModel::init(cfg, init_rng);
  Rng rng(19);
  Tensor obs = rand_tensor({cfg.t_obs, cfg.d_obs}, rng, -1.0, 0.0);
  StepScaleSequence r = StepScaleSequence::ones(cfg.t_obs, cfg.t_act);
  Tensor out = ddpm_sample(obs, r, m, rng);
  for (double v : out.values()) {
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);
  }
}

TEST_CASE("action factor layout: constant tail and ramp") {
  RactSpec c;
  c.factor = 0.5;
  std::vector<double> f = c.action_factors(2, 5);
  REQUIRE(f.size() == 5);
  CHECK(f[0] == 1.0);
  CHECK(f[1] == 1.0);
  for (int i = 2; i < 5; ++i) CHECK(f[static_cast<size_t>(i)] == 0.5);

  RactSpec ramp;
  ramp.factor = 0.7;
  ramp.ramp = true;
  ramp.ramp_end = 0.5;
  std::vector<double> g = ramp.action_factors(2, 5);
  CHECK(g[2] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(g[4] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g[3] == doctest::Approx(0.6).epsilon(1e-12));

  RactSpec bad;
  bad.factor = 0.0;
  CHECK_THROWS(bad.action_factors(2, 5));
}

TEST_CASE("short observation histories pad by repeating the earliest entry") {
  DiSPoConfig cfg = tiny_config();
  Rng init_rng(23);
  DiSPoModel m = DiSPoModel::init(cfg, init_rng);
  Normalizer norm;
  norm.obs_min = {0, 0, 0};
  norm.obs_max = {1, 1, 1};
  norm.act_min = {-1, -1};
  norm.act_max = {1, 1};
  std::vector<double> o{0.3, 0.4, 0.5};
  RactSpec spec;
  Rng r1(29), r2(29);
  auto w1 = sample_action_window({o}, spec, m, norm, r1);
  auto w2 = sample_action_window({o, o}, spec, m, norm, r2);
  REQUIRE(w1.size() == static_cast<size_t>(cfg.t_act));
  REQUIRE(w1[0].size() == static_cast<size_t>(cfg.d_act));
  for (size_t i = 0; i < w1.size(); ++i)
    for (size_t j = 0; j < w1[i].size(); ++j) CHECK(w1[i][j] == w2[i][j]);
  // Denormalized output lies inside the action bounds.
  for (const auto& row : w1)
    for (double v : row) {
      CHECK(v <= 1.0);
      CHECK(v >= -1.0);
    }
}

TEST_CASE("infer_next_action returns the executed slot of the window") {
  DiSPoConfig cfg = tiny_config();
  Rng init_rng(31);
  DiSPoModel m = DiSPoModel::init(cfg, init_rng);
  Normalizer norm;
  norm.obs_min = {0, 0, 0};
  norm.obs_max = {1, 1, 1};
  norm.act_min = {-2, -2};
  norm.act_max = {2, 2};
  std::vector<std::vector<double>> hist{{0.1, 0.2, 0.3}, {0.2, 0.3, 0.4}};
  RactSpec spec;
  Rng r1(37), r2(37);
  auto window = sample_action_window(hist, spec, m, norm, r1);
  auto next = infer_next_action(hist, spec, m, norm, r2);
  int exec = cfg.executed_index();
  REQUIRE(exec == 3);
  for (size_t j = 0; j < next.size(); ++j)
    CHECK(next[j] == window[static_cast<size_t>(exec - 1)][j]);
}
