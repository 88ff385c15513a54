#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "dispo/trainer.hpp"
#include "support/testutil.hpp"

using namespace dispo;

namespace {

struct ToyRun {
  DiSPoModel model;
  std::vector<EpochMetrics> hist;
};

ToyRun run_toy(uint64_t seed, int epochs, double w_rnc) {
  Dataset ds = testutil::toy_constant_dataset(0.3, 24, 3, 2);
  DiSPoConfig cfg = testutil::tiny_config();
  cfg.w_rnc = w_rnc;
  Rng init(seed);
  ToyRun run{DiSPoModel::init(cfg, init), {}};
  AdamWConfig oc;
  oc.lr = 1e-2;
  AdamW opt(run.model.parameters(), oc);
  TrainConfig tc;
  tc.batch_size = 8;
  tc.steps_per_epoch = 4;
  AugmentConfig aug;
  Rng rng(seed + 1);
  for (int e = 0; e < epochs; ++e) {
    run.hist.push_back(train_epoch(ds, run.model, opt, tc, aug, rng));
  }
  return run;
}

}  // namespace

TEST_CASE("noise-prediction loss descends on a constant-action task") {
  ToyRun run = run_toy(3, 50, 1.0);
  REQUIRE(run.hist.size() == 50);
  for (const EpochMetrics& em : run.hist) {
    CHECK(em.steps == 4);
    CHECK(std::isfinite(em.l_total));
    CHECK(em.l_total == doctest::Approx(em.l_mse + em.l_rnc).epsilon(1e-12));
  }
  // 5-epoch means: monotone within minibatch slack (the absolute term covers
  // jitter once the loss sits on its low plateau), large overall drop.
  std::vector<double> smooth;
  for (size_t b = 0; b + 5 <= run.hist.size(); b += 5) {
    double s = 0.0;
    for (size_t e = b; e < b + 5; ++e) s += run.hist[e].l_mse;
    smooth.push_back(s / 5.0);
  }
  REQUIRE(smooth.size() == 10);
  for (size_t i = 0; i + 1 < smooth.size(); ++i) {
    CHECK(smooth[i + 1] <= smooth[i] * 1.05 + 0.02);
  }
  CHECK(smooth.back() < 0.7 * smooth.front());
}

TEST_CASE("rank-contrast weight zero produces exactly zero rnc loss") {
  ToyRun run = run_toy(5, 3, 0.0);
  for (const EpochMetrics& em : run.hist) {
    CHECK(em.l_rnc == 0.0);
    CHECK(em.l_total == em.l_mse);
  }
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  ToyRun a = run_toy(11, 4, 1.0);
  ToyRun b = run_toy(11, 4, 1.0);
  for (size_t e = 0; e < a.hist.size(); ++e) {
    CHECK(a.hist[e].l_mse == b.hist[e].l_mse);
    CHECK(a.hist[e].l_rnc == b.hist[e].l_rnc);
    CHECK(a.hist[e].skipped_variants == b.hist[e].skipped_variants);
  }
  auto pa = a.model.parameters();
  auto pb = b.model.parameters();
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    for (int64_t e = 0; e < pa[i].size(); ++e) {
      CHECK(pa[i].data()[e] == pb[i].data()[e]);
    }
  }
  ToyRun c = run_toy(12, 4, 1.0);
  CHECK(c.hist[0].l_mse != a.hist[0].l_mse);
}

TEST_CASE("default step count covers the dataset once") {
  Dataset ds = testutil::toy_constant_dataset(0.3, 24, 3, 2);
  DiSPoConfig cfg = testutil::tiny_config();
  Rng init(7);
  DiSPoModel model = DiSPoModel::init(cfg, init);
  AdamW opt(model.parameters(), AdamWConfig{});
  TrainConfig tc;
  tc.batch_size = 8;
  tc.steps_per_epoch = 0;
  AugmentConfig aug;
  Rng rng(8);
  EpochMetrics em = train_epoch(ds, model, opt, tc, aug, rng);
  int windows = ds.window_count(0, cfg.t_obs, cfg.t_act);
  CHECK(em.steps == (windows + tc.batch_size - 1) / tc.batch_size);
}

TEST_CASE("non-finite losses abort before any parameter update") {
  Dataset ds = testutil::toy_constant_dataset(0.3, 24, 3, 2);
  DiSPoConfig cfg = testutil::tiny_config();
  Rng init(9);
  DiSPoModel model = DiSPoModel::init(cfg, init);
  model.head_w.values()[0] = std::numeric_limits<double>::quiet_NaN();
  AdamW opt(model.parameters(), AdamWConfig{});
  TrainConfig tc;
  tc.batch_size = 4;
  tc.steps_per_epoch = 2;
  AugmentConfig aug;
  Rng rng(10);
  CHECK_THROWS_AS(train_epoch(ds, model, opt, tc, aug, rng), NumericError);
  CHECK(opt.step_count() == 0);
}
