#pragma once

#include <vector>

#include "dispo/ops.hpp"
#include "dispo/rng.hpp"
#include "dispo/tensor.hpp"

namespace dispo {

// Selective-SSM core: diagonal A stored as A_log with A = -exp(A_log), plus
// the input-dependent maps producing B, C and the pre-softplus delta.
struct SsmCoreParams {
  Tensor a_log;     // [D_inner x N]
  Tensor w_b;       // [N x D_inner]
  Tensor b_b;       // [N]
  Tensor w_c;       // [N x D_inner]
  Tensor b_c;       // [N]
  Tensor w_delta;   // [D_inner x D_inner]
  Tensor b_delta;   // [D_inner] (the delta bias)

  static SsmCoreParams init(int d_inner, int n, Rng& rng);
  std::vector<Tensor> parameters() const;

  // A = -exp(A_log), materialized on the tape so gradients flow to A_log.
  Tensor a_diag() const;
};

// One pre-norm residual block: norm -> in_proj (content | gate) -> causal
// depthwise conv + SiLU on content -> selective SSM -> * SiLU(gate) ->
// out_proj -> + input.
struct MambaRBlockParams {
  Tensor ln_gain;   // [D]
  Tensor ln_bias;   // [D]
  Tensor w_in;      // [2*D_inner x D]
  Tensor b_in;      // [2*D_inner]
  Tensor conv_w;    // [D_inner x conv_width]
  Tensor conv_b;    // [D_inner]
  SsmCoreParams ssm;
  Tensor w_out;     // [D x D_inner]
  Tensor b_out;     // [D]

  static MambaRBlockParams init(int d, int d_inner, int n, int conv_width, Rng& rng);
  std::vector<Tensor> parameters() const;
};

// Per-position step-scale factors over the L = 1 + T_o + T_a sequence rows.
// The diffusion-step slot and the T_o observation slots are pinned to 1; only
// the action segment carries non-unit factors.
struct StepScaleSequence {
  Tensor r;  // [L], strictly positive

  // r = [1, 1 x T_o, action_factors...]; action_factors length must be T_a.
  static StepScaleSequence build(int t_o, const std::vector<double>& action_factors);
  static StepScaleSequence ones(int t_o, int t_a);
  int length() const { return r.dim(0); }
  void validate(int expected_len) const;
};

// delta[l,d] = r[l] * softplus(f_delta(u[l]) + delta_bias)[d].
Tensor compute_delta(const Tensor& u, const StepScaleSequence& r, const SsmCoreParams& p);
// The unscaled softplus(f_delta(u) + bias) term alone.
Tensor compute_delta_unscaled(const Tensor& u, const SsmCoreParams& p);

// Full block: u_in [L x D] -> u_out [L x D].
Tensor mamba_r_forward(const Tensor& u_in, const StepScaleSequence& r,
                       const MambaRBlockParams& params);

}  // namespace dispo
