#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DiSPo: step-scaled selective-SSM diffusion policy"};
  app.require_subcommand(1);

  dispo::GenDemosArgs gd;
  CLI::App* gen = app.add_subcommand("gen-demos", "Generate expert demonstrations");
  gen->add_option("--task", gd.task, "side_tap | draw_rect | draw_arc");
  gen->add_option("--n", gd.n, "demo count");
  gen->add_option("--stride", gd.stride, "coarsify stride");
  gen->add_option("--rate", gd.rate, "fine demonstration rate");
  gen->add_option("--seed", gd.seed, "rng seed");
  gen->add_option("--out", gd.out, "coarse demos path (fine lands beside)");

  std::string config_path, data_path, out_dir, ckpt_dir;
  std::vector<std::string> unset;

  CLI::App* train = app.add_subcommand("train", "Train a policy");
  bool have_task = false, have_seed = false, have_epochs = false, have_steps = false;
  bool have_wrnc = false, have_cadence = false, have_episodes = false, have_batch = false;
  std::string o_task;
  uint64_t o_seed = 0;
  int o_epochs = 0, o_steps = 0, o_cadence = 0, o_episodes = 0, o_batch = 0;
  double o_wrnc = 0;
  train->add_option("--config", config_path, "JSON config; flags override");
  train->add_option("--data", data_path, "demos.jsonl")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--task", o_task)->each([&](const std::string&) { have_task = true; });
  train->add_option("--seed", o_seed)->each([&](const std::string&) { have_seed = true; });
  train->add_option("--epochs", o_epochs)->each([&](const std::string&) { have_epochs = true; });
  train->add_option("--steps-per-epoch", o_steps)->each([&](const std::string&) {
    have_steps = true;
  });
  train->add_option("--w-rnc", o_wrnc)->each([&](const std::string&) { have_wrnc = true; });
  train->add_option("--eval-cadence", o_cadence)->each([&](const std::string&) {
    have_cadence = true;
  });
  train->add_option("--eval-episodes", o_episodes)->each([&](const std::string&) {
    have_episodes = true;
  });
  train->add_option("--batch-size", o_batch)->each([&](const std::string&) { have_batch = true; });

  CLI::App* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string e_task = "draw_rect", e_ablation = "none", e_obs = "native";
  int e_episodes = 20;
  uint64_t e_seed = 1;
  std::vector<double> e_scales{1.0, 0.5};
  ev->add_option("--ckpt", ckpt_dir, "checkpoint directory")->required();
  ev->add_option("--task", e_task, "task name")->required();
  ev->add_option("--episodes", e_episodes, "episode count");
  ev->add_option("--step-scale", e_scales, "step scales to sweep");
  ev->add_option("--ablation", e_ablation, "none | interp");
  ev->add_option("--obs-mode", e_obs, "native | every");
  ev->add_option("--seed", e_seed, "rng seed");
  ev->add_option("--out", out_dir, "output directory")->required();

  dispo::DumpFeaturesArgs df;
  CLI::App* dump = app.add_subcommand("dump-features", "Dump mid-stack features");
  dump->add_option("--ckpt", df.ckpt, "checkpoint directory")->required();
  dump->add_option("--data", df.data, "demos.jsonl")->required();
  dump->add_option("--k", df.k, "diffusion step");
  dump->add_option("--seed", df.seed, "rng seed");
  dump->add_option("--out", df.out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return dispo::cmd_gen_demos(gd);
    if (train->parsed()) {
      dispo::RunConfig rc = dispo::load_run_config(config_path);
      if (have_task) rc.task = o_task;
      if (have_seed) rc.seed = o_seed;
      if (have_epochs) rc.epochs = o_epochs;
      if (have_steps) rc.steps_per_epoch = o_steps;
      if (have_wrnc) rc.model.w_rnc = o_wrnc;
      if (have_cadence) rc.eval_cadence = o_cadence;
      if (have_episodes) rc.eval_episodes = o_episodes;
      if (have_batch) rc.batch_size = o_batch;
      return dispo::cmd_train(rc, data_path, out_dir);
    }
    if (ev->parsed()) {
      dispo::RunConfig rc;
      rc.task = e_task;
      rc.seed = e_seed;
      rc.episodes = e_episodes;
      rc.eval_scales = e_scales;
      rc.ablation = e_ablation;
      rc.obs_mode = e_obs;
      return dispo::cmd_eval(rc, ckpt_dir, out_dir);
    }
    if (dump->parsed()) return dispo::cmd_dump_features(df);
  } catch (const dispo::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
