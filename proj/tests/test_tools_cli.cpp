#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "commands.hpp"
#include "dispo/dataset.hpp"
#include "support/testutil.hpp"

using namespace dispo;
using nlohmann::json;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

GenDemosArgs demo_args(const std::string& dir, int n, int stride) {
  GenDemosArgs a;
  a.task = "draw_rect";
  a.n = n;
  a.stride = stride;
  a.rate = 1.0;
  a.seed = 3;
  a.out = dir + "/demos.jsonl";
  return a;
}

RunConfig tiny_run_config() {
  RunConfig rc;
  rc.task = "draw_rect";
  rc.seed = 5;
  rc.model.d_model = 8;
  rc.model.n_state = 4;
  rc.model.n_block = 2;
  rc.model.t_obs = 2;
  rc.model.t_act = 5;
  rc.model.diffusion_steps = 5;
  rc.batch_size = 4;
  rc.steps_per_epoch = 2;
  rc.epochs = 2;
  rc.eval_cadence = 1;
  rc.eval_episodes = 1;
  rc.episodes = 2;
  return rc;
}

}  // namespace

TEST_CASE("gen-demos writes paired coarse and fine demo files") {
  std::string dir = testutil::scratch_dir("cli_demos");
  GenDemosArgs a = demo_args(dir, 4, 2);
  REQUIRE(cmd_gen_demos(a) == 0);

  auto coarse = load_trajectories(dir + "/demos.jsonl");
  auto fine = load_trajectories(dir + "/demos_fine.jsonl");
  REQUIRE(coarse.size() == 4);
  REQUIRE(fine.size() == 4);
  for (size_t i = 0; i < coarse.size(); ++i) {
    CHECK(coarse[i].task == "draw_rect");
    CHECK(fine[i].rate == 1.0);
    CHECK(coarse[i].rate == 0.5);
    CHECK(coarse[i].length() >= 2);
    CHECK(coarse[i].length() <= fine[i].length());
  }

  GenDemosArgs again = a;
  again.out = dir + "/demos2.jsonl";
  REQUIRE(cmd_gen_demos(again) == 0);
  CHECK(testutil::read_file(dir + "/demos.jsonl") == testutil::read_file(dir + "/demos2.jsonl"));
  CHECK(testutil::read_file(dir + "/demos_fine.jsonl") ==
        testutil::read_file(dir + "/demos2_fine.jsonl"));

  GenDemosArgs one = a;
  one.stride = 1;
  one.out = dir + "/demos1.jsonl";
  REQUIRE(cmd_gen_demos(one) == 0);
  CHECK(testutil::read_file(dir + "/demos1.jsonl") ==
        testutil::read_file(dir + "/demos1_fine.jsonl"));

  GenDemosArgs bad = a;
  bad.task = "juggling";
  CHECK(cmd_gen_demos(bad) == 2);
}

TEST_CASE("train command emits metrics, checkpoints, and a best pointer") {
  std::string dir = testutil::scratch_dir("cli_train");
  REQUIRE(cmd_gen_demos(demo_args(dir, 4, 2)) == 0);
  RunConfig rc = tiny_run_config();

  REQUIRE(cmd_train(rc, dir + "/demos.jsonl", dir + "/run_a") == 0);

  RunConfig echoed = load_run_config(dir + "/run_a/config.json");
  CHECK(echoed.task == "draw_rect");
  CHECK(echoed.model.d_obs == 7);  // resolved dims are echoed
  CHECK(echoed.epochs == 2);

  auto rows = lines_of(testutil::read_file(dir + "/run_a/metrics.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "epoch,l_mse,l_rnc,eval_score");
  CHECK(rows[1].substr(0, 2) == "1,");
  CHECK(rows[2].substr(0, 2) == "2,");
  // cadence 1: the eval field is populated on every row
  CHECK(rows[1].back() != ',');
  CHECK(rows[2].back() != ',');

  CHECK(std::filesystem::exists(dir + "/run_a/ckpt_epoch_1/manifest.json"));
  CHECK(std::filesystem::exists(dir + "/run_a/ckpt_epoch_2/weights.bin"));

  json best = json::parse(testutil::read_file(dir + "/run_a/best.json"));
  int be = best.at("epoch").get<int>();
  CHECK((be == 1 || be == 2));
  CHECK(best.at("dir").get<std::string>() == "ckpt_epoch_" + std::to_string(be));
  CHECK(std::filesystem::is_symlink(dir + "/run_a/best"));
  CHECK(std::filesystem::read_symlink(dir + "/run_a/best").string() ==
        "ckpt_epoch_" + std::to_string(be));
  // the best score is the eval field of that epoch's metrics row
  std::string row = rows[static_cast<size_t>(be)];
  std::string eval_field = row.substr(row.rfind(',') + 1);
  CHECK(best.at("score").get<double>() == doctest::Approx(std::stod(eval_field)).epsilon(1e-12));

  // identical config, identical bytes
  REQUIRE(cmd_train(rc, dir + "/demos.jsonl", dir + "/run_b") == 0);
  CHECK(testutil::read_file(dir + "/run_a/metrics.csv") ==
        testutil::read_file(dir + "/run_b/metrics.csv"));
  CHECK(testutil::read_file(dir + "/run_a/config.json") ==
        testutil::read_file(dir + "/run_b/config.json"));
  CHECK(testutil::read_file(dir + "/run_a/best.json") ==
        testutil::read_file(dir + "/run_b/best.json"));
  CHECK(testutil::read_file(dir + "/run_a/ckpt_epoch_2/weights.bin") ==
        testutil::read_file(dir + "/run_b/ckpt_epoch_2/weights.bin"));

  CHECK(cmd_train(rc, dir + "/missing.jsonl", dir + "/run_c") == 2);
  RunConfig clash = rc;
  clash.task = "side_tap";
  CHECK(cmd_train(clash, dir + "/demos.jsonl", dir + "/run_d") == 2);
}

TEST_CASE("eval command reports per-scale episodes and summaries") {
  std::string dir = testutil::scratch_dir("cli_eval");
  REQUIRE(cmd_gen_demos(demo_args(dir, 4, 2)) == 0);
  RunConfig rc = tiny_run_config();
  REQUIRE(cmd_train(rc, dir + "/demos.jsonl", dir + "/run") == 0);
  std::string ckpt = dir + "/run/ckpt_epoch_2";

  RunConfig ev = rc;
  ev.eval_scales = {1.0, 0.5};
  REQUIRE(cmd_eval(ev, ckpt, dir + "/eval_a") == 0);

  auto eps = lines_of(testutil::read_file(dir + "/eval_a/episodes.jsonl"));
  REQUIRE(eps.size() == 4);  // 2 scales x 2 episodes
  std::vector<json> ejs;
  for (const std::string& line : eps) ejs.push_back(json::parse(line));
  CHECK(ejs[0].at("scale").get<double>() == 1.0);
  CHECK(ejs[1].at("scale").get<double>() == 1.0);
  CHECK(ejs[2].at("scale").get<double>() == 0.5);
  CHECK(ejs[3].at("scale").get<double>() == 0.5);
  // the same episode seeds recur at every scale
  CHECK(ejs[0].at("seed").get<uint64_t>() == ejs[2].at("seed").get<uint64_t>());
  CHECK(ejs[1].at("seed").get<uint64_t>() == ejs[3].at("seed").get<uint64_t>());
  for (const json& e : ejs) {
    CHECK(e.at("ablation").get<std::string>() == "none");
    CHECK(e.at("positions").size() == e.at("steps").get<size_t>());
  }

  auto sum = lines_of(testutil::read_file(dir + "/eval_a/summary.csv"));
  REQUIRE(sum.size() == 3);
  CHECK(sum[0].substr(0, 15) == "scale,episodes,");
  CHECK(sum[0].find("score_mean,score_std,score_min,score_max") != std::string::npos);
  CHECK(sum[0].find("iou_max_mean") != std::string::npos);
  // summary row 1 carries the mean of the scale-1 episode scores
  std::vector<std::string> cells;
  {
    std::istringstream in(sum[1]);
    std::string c;
    while (std::getline(in, c, ',')) cells.push_back(c);
  }
  REQUIRE(cells.size() == 18);
  CHECK(cells[0] == "1");
  CHECK(cells[1] == "2");
  double want = 0.5 * (ejs[0].at("score").get<double>() + ejs[1].at("score").get<double>());
  CHECK(std::stod(cells[2]) == doctest::Approx(want).epsilon(1e-7));

  REQUIRE(cmd_eval(ev, ckpt, dir + "/eval_b") == 0);
  CHECK(testutil::read_file(dir + "/eval_a/episodes.jsonl") ==
        testutil::read_file(dir + "/eval_b/episodes.jsonl"));
  CHECK(testutil::read_file(dir + "/eval_a/summary.csv") ==
        testutil::read_file(dir + "/eval_b/summary.csv"));

  RunConfig ab = ev;
  ab.ablation = "interp";
  REQUIRE(cmd_eval(ab, ckpt, dir + "/eval_i") == 0);
  auto ieps = lines_of(testutil::read_file(dir + "/eval_i/episodes.jsonl"));
  REQUIRE(ieps.size() == 2);  // interp ignores the scale sweep
  for (const std::string& line : ieps) {
    json e = json::parse(line);
    CHECK(e.at("ablation").get<std::string>() == "interp");
    CHECK(e.at("scale").get<double>() == 0.5);
  }
  CHECK(lines_of(testutil::read_file(dir + "/eval_i/summary.csv")).size() == 2);

  CHECK(cmd_eval(ev, dir + "/no_ckpt", dir + "/eval_c") == 2);
}

TEST_CASE("dump-features writes one row per training window") {
  std::string dir = testutil::scratch_dir("cli_feat");
  REQUIRE(cmd_gen_demos(demo_args(dir, 3, 2)) == 0);
  RunConfig rc = tiny_run_config();
  REQUIRE(cmd_train(rc, dir + "/demos.jsonl", dir + "/run") == 0);

  DumpFeaturesArgs fa;
  fa.ckpt = dir + "/run/ckpt_epoch_2";
  fa.data = dir + "/demos.jsonl";
  fa.k = 3;
  fa.seed = 9;
  fa.out = dir + "/feat.csv";
  REQUIRE(cmd_dump_features(fa) == 0);

  Dataset ds = Dataset::build(load_trajectories(dir + "/demos.jsonl"));
  long windows = 0;
  for (size_t t = 0; t < ds.trajs.size(); ++t) {
    windows += ds.window_count(static_cast<int>(t), rc.model.t_obs, rc.model.t_act);
  }
  auto rows = lines_of(testutil::read_file(dir + "/feat.csv"));
  CHECK(static_cast<long>(rows.size()) == windows);
  for (const std::string& row : rows) {
    CHECK(std::count(row.begin(), row.end(), ',') == 8 + 2 - 1);  // D + d_act fields
  }

  DumpFeaturesArgs fb = fa;
  fb.out = dir + "/feat2.csv";
  REQUIRE(cmd_dump_features(fb) == 0);
  CHECK(testutil::read_file(dir + "/feat.csv") == testutil::read_file(dir + "/feat2.csv"));

  DumpFeaturesArgs high = fa;
  high.k = 7;  // diffusion runs 5 steps
  CHECK(cmd_dump_features(high) == 2);
  DumpFeaturesArgs zero = fa;
  zero.k = 0;
  CHECK(cmd_dump_features(zero) == 2);
  DumpFeaturesArgs nock = fa;
  nock.ckpt = dir + "/nowhere";
  CHECK(cmd_dump_features(nock) == 2);
}
