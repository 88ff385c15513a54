#pragma once

#include <string>
#include <vector>

#include "dispo/model.hpp"
#include "dispo/rng.hpp"
#include "dispo/tensor.hpp"

namespace dispo {

// One demonstration. obs[n] is the observation at grid time n/rate; act[n]
// is the position target whose execution moves the agent from its state at
// time n to the demonstrated state at time n+1 (next-step arrival).
struct Trajectory {
  std::string task;
  double rate = 1.0;  // samples per unit time
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<double>> act;

  int length() const { return static_cast<int>(obs.size()); }
  void validate() const;
};

std::vector<Trajectory> load_trajectories(const std::string& path);
void save_trajectories(const std::string& path, const std::vector<Trajectory>& trajs);

// Per-dimension affine map fitted from data min/max. Actions map onto
// [-1, 1], observations onto [-1, 0]. Out-of-range inputs clamp (counted);
// a degenerate dimension (min = max) maps to the range midpoint.
struct Normalizer {
  std::vector<double> obs_min, obs_max;
  std::vector<double> act_min, act_max;
  mutable long clamped = 0;
  int degenerate_dims = 0;

  static Normalizer fit(const std::vector<Trajectory>& trajs);

  std::vector<double> normalize_obs(const std::vector<double>& x) const;
  std::vector<double> normalize_act(const std::vector<double>& x) const;
  std::vector<double> denormalize_act(const std::vector<double>& x) const;
  std::vector<double> denormalize_obs(const std::vector<double>& x) const;
};

// Linear interpolation of obs and act onto the uniform grid at rate w_new
// spanning the same time interval. Endpoints land on source samples exactly.
Trajectory resample_trajectory(const Trajectory& src, double w_new);

// Keeps every stride-th sample starting from a random offset in [0, stride);
// rate divides by stride.
Trajectory coarsify_demo(const Trajectory& fine, int stride, Rng& rng);
Trajectory coarsify_demo_offset(const Trajectory& fine, int stride, int offset);

// One augmented variant of a source window. The action window holds T_o
// arrival targets on the native grid (ending at the latest-observation time)
// followed by T_a - T_o arrivals continuing at the variant rate. r_act keeps
// 1 on the native slots and w_0/w_j on the tail.
struct AugmentedWindow {
  int source_id = 0;
  double rate = 1.0;           // w_j
  double rate_factor = 1.0;    // w_0 / w_j, the r_act tail value
  Tensor obs;                  // [T_o x d_obs], normalized
  Tensor act;                  // [T_a x d_act], normalized
  std::vector<double> act_denorm;  // flattened, for rank-contrast labels
  std::vector<double> r_act;       // [T_a]
};

struct WindowGroup {
  std::vector<AugmentedWindow> variants;  // variant 0 first
};

struct BatchStats {
  int skipped_variants = 0;  // window too short for a coarser rate
};

struct Dataset {
  std::vector<Trajectory> trajs;
  Normalizer norm;
  double native_rate = 1.0;

  static Dataset build(std::vector<Trajectory> trajs);
  // Start indices i0 with a full variant-0 window: obs rows i0..i0+T_o-1 and
  // action arrivals i0..i0+T_a-1 (so act indices i0-1..i0+T_a-2).
  int window_count(int traj, int t_obs, int t_act) const;
};

// Integer coarsening factors for the variants beyond variant 0, e.g. {2}
// gives one extra variant at w_0/2.
struct AugmentConfig {
  std::vector<int> rate_divisors = {2};
};

// Builds one group: variant 0 plus one variant per divisor. Variants whose
// tail would run past the trajectory end are skipped and counted.
WindowGroup make_window_group(const Dataset& ds, int traj, int i0, const DiSPoConfig& cfg,
                              const AugmentConfig& aug, BatchStats* stats);

// Draws `count` groups with uniformly random (trajectory, start) pairs.
std::vector<WindowGroup> make_training_batch(const Dataset& ds, const DiSPoConfig& cfg,
                                             const AugmentConfig& aug, int count, Rng& rng,
                                             BatchStats* stats);

}  // namespace dispo
