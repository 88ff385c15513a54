#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dispo/model.hpp"
#include "dispo/optim.hpp"

namespace dispo {

// Everything one experiment needs, with working defaults throughout. JSON
// round-trips; keys absent from a file keep their defaults, unknown keys are
// rejected.
struct RunConfig {
  std::string task = "draw_rect";
  uint64_t seed = 1;

  DiSPoConfig model;   // d_obs/d_act of 0 resolve from the task
  AdamWConfig optim;

  // training
  int batch_size = 64;
  int steps_per_epoch = 0;  // 0 = ceil(total windows / batch)
  int epochs = 200;
  int eval_cadence = 20;    // epochs between in-training evaluations
  int eval_episodes = 10;
  std::vector<int> rate_divisors = {2};

  // demo generation
  int demos = 90;
  int stride = 2;
  double fine_rate = 1.0;

  // evaluation
  int episodes = 20;
  std::vector<double> eval_scales = {1.0, 0.5};
  std::string obs_mode = "native";
  std::string ablation = "none";

  // Fills d_obs/d_act from the task when unset and validates the result.
  void resolve();
};

RunConfig run_config_from_json_text(const std::string& text);
std::string run_config_to_json_text(const RunConfig& rc);

RunConfig load_run_config(const std::string& path);  // empty path = defaults
void echo_run_config(const RunConfig& rc, const std::string& out_dir);

}  // namespace dispo
