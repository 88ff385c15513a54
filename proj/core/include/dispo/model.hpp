#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "dispo/rng.hpp"
#include "dispo/schedule.hpp"
#include "dispo/ssm.hpp"
#include "dispo/tensor.hpp"

namespace dispo {

struct DiSPoConfig {
  int d_model = 64;        // row width D
  int n_state = 16;        // SSM state size N
  int n_block = 4;         // block count, even
  int t_obs = 2;           // observation horizon T_o
  int t_act = 5;           // action horizon T_a, >= T_o
  int diffusion_steps = 25;  // K, at most 100
  int d_obs = 0;
  int d_act = 0;
  int conv_width = 4;
  int expand = 2;          // D_inner = expand * D
  std::string schedule_kind = "squared_cosine";
  double tau_rnc = 2.0;
  double w_mse = 1.0;
  double w_rnc = 1.0;
  // 1-based index into the action window picked as the executed action. The
  // T_o-th element sits at the latest-observation time slot.
  int exec_index = 0;  // 1-based slot to execute; 0 = first slot past the obs span

  int seq_len() const { return 1 + t_obs + t_act; }
  int d_inner() const { return expand * d_model; }
  int executed_index() const {
    return exec_index > 0 ? exec_index : std::min(t_obs + 1, t_act);
  }
  void validate() const;
};

// Noise-prediction network: input embeddings with type encodings, a stack of
// Mamba-R blocks joined by long additive skips, and a layer-norm + linear
// head over the trailing action rows.
struct DiSPoModel {
  DiSPoConfig cfg;
  Tensor w_obs, b_obs;      // [D x d_obs], [D]
  Tensor w_act, b_act;      // [D x d_act], [D]
  Tensor lambda_k, lambda_obs, lambda_act;  // [D] type encodings
  std::vector<MambaRBlockParams> blocks;
  Tensor head_ln_gain, head_ln_bias;  // [D]
  Tensor head_w, head_b;              // [d_act x D], [d_act]
  NoiseSchedule schedule;

  static DiSPoModel init(const DiSPoConfig& cfg, Rng& rng);
  std::vector<Tensor> parameters() const;
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
};

// Sinusoidal encoding of the (1-based) diffusion step, dimension d.
Tensor diffusion_step_encoding(int k, int d);

// u1 rows: [step encoding + lambda_k | W_O f_obs + b_O + lambda_O | W_A f_act
// + b_A + lambda_A].
Tensor encode_inputs(int k, const Tensor& obs, const Tensor& act_noisy,
                     const DiSPoModel& model);

struct ForwardResult {
  Tensor eps_hat;      // [T_a x d_act]
  Tensor mid_feature;  // [L x D], output of block N_block/2
};

ForwardResult forward_noise_pred(const Tensor& obs, const Tensor& act_noisy,
                                 const StepScaleSequence& r, int k,
                                 const DiSPoModel& model);

// The additive long-skip wiring: pairs (source block i, destination block
// N_block - i + 1), 1-based, for i = 1..N_block/2. Exposed for inspection.
std::vector<std::pair<int, int>> skip_pairs(int n_block);

}  // namespace dispo
