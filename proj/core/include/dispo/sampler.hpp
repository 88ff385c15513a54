#pragma once

#include <vector>

#include "dispo/dataset.hpp"
#include "dispo/model.hpp"
#include "dispo/rng.hpp"
#include "dispo/schedule.hpp"
#include "dispo/ssm.hpp"
#include "dispo/tensor.hpp"

namespace dispo {

// Forward-process pair: a_k = sqrt(abar_k) a0 + sqrt(1 - abar_k) eps.
struct NoisedPair {
  Tensor a_k;
  Tensor eps;
};

NoisedPair ddpm_training_pair(const Tensor& a0, int k, const NoiseSchedule& sched, Rng& rng);

// Reverse process from standard normal, k = K..1; the k = 1 step is
// noise-free and the result clips to [-1, 1]. Runs without a tape.
Tensor ddpm_sample(const Tensor& obs, const StepScaleSequence& r, const DiSPoModel& model,
                   Rng& rng);

// Step-scale request for the action tail: constant factor, or a linear ramp
// across the tail slots.
struct RactSpec {
  double factor = 1.0;
  bool ramp = false;
  double ramp_end = 1.0;  // tail runs factor -> ramp_end when ramp is set

  // Length-T_a factor vector: ones over the first T_o slots, then the tail.
  std::vector<double> action_factors(int t_obs, int t_act) const;
};

// Full denormalized action window [T_a][d_act] for one inference call.
// obs_history holds native-rate observations, oldest first; shorter histories
// pad by repeating the earliest entry.
std::vector<std::vector<double>> sample_action_window(
    const std::vector<std::vector<double>>& obs_history, const RactSpec& spec,
    const DiSPoModel& model, const Normalizer& norm, Rng& rng);

// The executed slot of the sampled window (config exec_index, 1-based).
std::vector<double> infer_next_action(const std::vector<std::vector<double>>& obs_history,
                                      const RactSpec& spec, const DiSPoModel& model,
                                      const Normalizer& norm, Rng& rng);

}  // namespace dispo
