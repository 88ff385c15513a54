#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dispo/checkpoint.hpp"
#include "dispo/envs.hpp"
#include "dispo/sampler.hpp"

namespace dispo {

enum class ObsMode { native, every };
enum class RolloutMode { dispo, interp };

ObsMode obs_mode_from_string(const std::string& s);
RolloutMode rollout_mode_from_string(const std::string& s);

struct RolloutOptions {
  RactSpec r_act;                      // step scale for dispo mode
  ObsMode obs_mode = ObsMode::native;
  RolloutMode mode = RolloutMode::dispo;
  int max_steps = 0;                   // 0 = task default
};

struct EpisodeResult {
  uint64_t seed = 0;
  double scale = 1.0;     // executed step scale (interp mode reports 0.5)
  int steps = 0;
  int taps = 0;
  int ideal_steps = 0;
  double score = 0.0;     // side tapping: tap score; drawing: iou_last
  double iou_last = 0.0;
  double iou_max = 0.0;
  long clamped = 0;
  std::vector<Vec2> positions;  // executed position per step
};

// One closed-loop episode. The seed fixes the environment initialization and
// the policy's diffusion noise; identical seeds replay bit-identically.
//
// Native observation mode samples one action window per native period
// (round(1/r) executed steps) and executes that many consecutive window slots
// starting at the configured executed index; "every" mode refreshes the
// history and re-infers each executed step. Interp mode runs the model at
// r=1, midpoint-doubles the future slots (leading with the midpoint between
// the current position and the first future action), and executes the first
// half open-loop.
EpisodeResult run_episode(const std::string& task, const Checkpoint& ck,
                          const RolloutOptions& opt, uint64_t seed);

struct EvalSummary {
  double mean_score = 0.0, std_score = 0.0, min_score = 0.0, max_score = 0.0;
  double mean_iou_last = 0.0, mean_iou_max = 0.0;
  double mean_taps = 0.0;
  int episodes = 0;
  // Selection key: mean score for side tapping, mean iou_max for drawing.
  double selection_score = 0.0;
};

EvalSummary summarize(const std::string& task, const std::vector<EpisodeResult>& eps);

}  // namespace dispo
