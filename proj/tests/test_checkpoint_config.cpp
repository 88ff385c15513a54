#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "dispo/checkpoint.hpp"
#include "dispo/config.hpp"
#include "support/testutil.hpp"

using namespace dispo;

namespace {

Checkpoint fresh_ck(uint64_t seed) {
  DiSPoConfig cfg = testutil::tiny_config();
  Rng rng(seed);
  Checkpoint ck;
  ck.model = DiSPoModel::init(cfg, rng);
  ck.norm.obs_min = {-1.5, -1.5, 0.0};
  ck.norm.obs_max = {1.5, 1.5, 1.0};
  ck.norm.act_min = {-0.25, -0.5};
  ck.norm.act_max = {0.75, 0.5};
  ck.native_rate = 0.5;
  return ck;
}

void patch_file(const std::string& path, const std::string& from, const std::string& to) {
  std::string text = testutil::read_file(path);
  size_t at = text.find(from);
  REQUIRE(at != std::string::npos);
  text.replace(at, from.size(), to);
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("checkpoint round-trips through float32 storage") {
  std::string dir = testutil::scratch_dir("ckpt_rt") + "/m";
  Checkpoint ck = fresh_ck(5);
  save_checkpoint(dir, ck.model, ck.norm, ck.native_rate);
  Checkpoint back = load_checkpoint(dir);

  CHECK(back.native_rate == ck.native_rate);
  CHECK(back.norm.obs_min == ck.norm.obs_min);
  CHECK(back.norm.act_max == ck.norm.act_max);
  CHECK(back.model.cfg.d_model == ck.model.cfg.d_model);
  CHECK(back.model.cfg.t_act == ck.model.cfg.t_act);
  CHECK(back.model.cfg.diffusion_steps == ck.model.cfg.diffusion_steps);
  CHECK(back.model.cfg.schedule_kind == ck.model.cfg.schedule_kind);

  auto orig = ck.model.named_parameters();
  auto load = back.model.named_parameters();
  REQUIRE(orig.size() == load.size());
  for (size_t i = 0; i < orig.size(); ++i) {
    CHECK(orig[i].first == load[i].first);
    const Tensor& a = orig[i].second;
    const Tensor& b = load[i].second;
    REQUIRE(a.shape() == b.shape());
    for (int64_t e = 0; e < a.size(); ++e) {
      // storage is float32: exact agreement after one rounding
      CHECK(b.data()[e] == static_cast<double>(static_cast<float>(a.data()[e])));
    }
  }
}

TEST_CASE("saving the same model twice is byte-identical") {
  std::string root = testutil::scratch_dir("ckpt_det");
  Checkpoint ck = fresh_ck(7);
  save_checkpoint(root + "/a", ck.model, ck.norm, ck.native_rate);
  save_checkpoint(root + "/b", ck.model, ck.norm, ck.native_rate);
  CHECK(testutil::read_file(root + "/a/manifest.json") ==
        testutil::read_file(root + "/b/manifest.json"));
  CHECK(testutil::read_file(root + "/a/weights.bin") ==
        testutil::read_file(root + "/b/weights.bin"));
}

TEST_CASE("checkpoint loader rejects damaged stores") {
  std::string root = testutil::scratch_dir("ckpt_bad");
  CHECK_THROWS(load_checkpoint(root + "/nowhere"));

  Checkpoint ck = fresh_ck(9);

  std::string tagged = root + "/tag";
  save_checkpoint(tagged, ck.model, ck.norm, ck.native_rate);
  patch_file(tagged + "/manifest.json", "dispo-checkpoint-v1", "dispo-checkpoint-v0");
  CHECK_THROWS(load_checkpoint(tagged));

  std::string skewed = root + "/skew";
  save_checkpoint(skewed, ck.model, ck.norm, ck.native_rate);
  patch_file(skewed + "/manifest.json", "\"steps\": 5", "\"steps\": 6");
  CHECK_THROWS(load_checkpoint(skewed));

  std::string cut = root + "/cut";
  save_checkpoint(cut, ck.model, ck.norm, ck.native_rate);
  auto full = std::filesystem::file_size(cut + "/weights.bin");
  std::filesystem::resize_file(cut + "/weights.bin", full - 4);
  CHECK_THROWS(load_checkpoint(cut));
}

TEST_CASE("run config round-trips and keeps defaults for absent keys") {
  RunConfig rc;
  rc.task = "side_tap";
  rc.seed = 99;
  rc.model.d_model = 8;
  rc.optim.lr = 3e-4;
  rc.eval_scales = {1.0, 0.5, 0.25};
  RunConfig back = run_config_from_json_text(run_config_to_json_text(rc));
  CHECK(back.task == rc.task);
  CHECK(back.seed == rc.seed);
  CHECK(back.model.d_model == 8);
  CHECK(back.optim.lr == 3e-4);
  CHECK(back.eval_scales == rc.eval_scales);
  CHECK(back.epochs == rc.epochs);
  CHECK(run_config_to_json_text(back) == run_config_to_json_text(rc));

  RunConfig partial = run_config_from_json_text(R"({"task": "side_tap", "epochs": 3})");
  CHECK(partial.task == "side_tap");
  CHECK(partial.epochs == 3);
  CHECK(partial.batch_size == 64);
  CHECK(partial.eval_scales == std::vector<double>{1.0, 0.5});
  CHECK(partial.rate_divisors == std::vector<int>{2});
}

TEST_CASE("run config rejects unknown keys at every level") {
  CHECK_THROWS(run_config_from_json_text(R"({"tsak": "x"})"));
  CHECK_THROWS(run_config_from_json_text(R"({"model": {"d_modell": 8}})"));
  CHECK_THROWS(run_config_from_json_text(R"({"optim": {"momentum": 0.9}})"));
  CHECK_NOTHROW(run_config_from_json_text(R"({"model": {"d_model": 8}})"));
}

TEST_CASE("resolve fills task dimensions and validates") {
  RunConfig rc;
  rc.task = "side_tap";
  rc.resolve();
  CHECK(rc.model.d_obs == 3);
  CHECK(rc.model.d_act == 2);

  RunConfig clash;
  clash.task = "side_tap";
  clash.model.d_obs = 7;
  CHECK_THROWS(clash.resolve());

  RunConfig bad;
  bad.epochs = 0;
  CHECK_THROWS(bad.resolve());

  RunConfig mode;
  mode.obs_mode = "sometimes";
  CHECK_THROWS(mode.resolve());

  RunConfig scale;
  scale.eval_scales = {1.0, 0.0};
  CHECK_THROWS(scale.resolve());
}

TEST_CASE("config file helpers") {
  std::string dir = testutil::scratch_dir("cfg_io");
  CHECK_THROWS(load_run_config(dir + "/absent.json"));
  RunConfig defaults = load_run_config("");
  CHECK(defaults.task == "draw_rect");

  RunConfig rc;
  rc.task = "draw_arc";
  rc.epochs = 12;
  echo_run_config(rc, dir);
  CHECK(testutil::read_file(dir + "/config.json") == run_config_to_json_text(rc));
  RunConfig back = load_run_config(dir + "/config.json");
  CHECK(back.task == "draw_arc");
  CHECK(back.epochs == 12);
}
