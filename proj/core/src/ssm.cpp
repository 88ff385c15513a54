#include "dispo/ssm.hpp"

#include <cmath>

namespace dispo {

namespace {

Tensor param(Shape shape) { return Tensor(std::move(shape), true); }

// Fan-in scaled uniform init, the usual dense-layer default.
Tensor linear_weight(int out_dim, int in_dim, Rng& rng) {
  Tensor w = param({out_dim, in_dim});
  double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  return w;
}

Tensor linear_bias(int out_dim, int in_dim, Rng& rng) {
  Tensor b = param({out_dim});
  double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& v : b.values()) v = rng.uniform(-bound, bound);
  return b;
}

}  // namespace

SsmCoreParams SsmCoreParams::init(int d_inner, int n, Rng& rng) {
  SsmCoreParams p;
  // -A spans [1, N] log-uniformly along the state axis, same for every
  // channel, so the block starts with a spread of decay time constants.
  p.a_log = param({d_inner, n});
  for (int d = 0; d < d_inner; ++d) {
    for (int s = 0; s < n; ++s) {
      double frac = n > 1 ? static_cast<double>(s) / (n - 1) : 0.0;
      p.a_log.at(d, s) = frac * std::log(static_cast<double>(n));
    }
  }
  p.w_b = linear_weight(n, d_inner, rng);
  p.b_b = linear_bias(n, d_inner, rng);
  p.w_c = linear_weight(n, d_inner, rng);
  p.b_c = linear_bias(n, d_inner, rng);
  p.w_delta = linear_weight(d_inner, d_inner, rng);
  // Bias chosen so softplus(bias) lands log-uniformly in [1e-3, 1e-1],
  // keeping initial steps small and positive.
  p.b_delta = param({d_inner});
  for (double& v : p.b_delta.values()) {
    double target = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
    v = std::log(std::expm1(target));
  }
  return p;
}

std::vector<Tensor> SsmCoreParams::parameters() const {
  return {a_log, w_b, b_b, w_c, b_c, w_delta, b_delta};
}

Tensor SsmCoreParams::a_diag() const { return ops::neg(ops::exp(a_log)); }

MambaRBlockParams MambaRBlockParams::init(int d, int d_inner, int n, int conv_width,
                                          Rng& rng) {
  MambaRBlockParams p;
  p.ln_gain = Tensor({d}, std::vector<double>(static_cast<size_t>(d), 1.0), true);
  p.ln_bias = param({d});
  p.w_in = linear_weight(2 * d_inner, d, rng);
  p.b_in = linear_bias(2 * d_inner, d, rng);
  p.conv_w = linear_weight(d_inner, conv_width, rng);
  p.conv_b = linear_bias(d_inner, conv_width, rng);
  p.ssm = SsmCoreParams::init(d_inner, n, rng);
  p.w_out = linear_weight(d, d_inner, rng);
  p.b_out = param({d});
  return p;
}

std::vector<Tensor> MambaRBlockParams::parameters() const {
  std::vector<Tensor> out = {ln_gain, ln_bias, w_in, b_in, conv_w, conv_b};
  for (const Tensor& t : ssm.parameters()) out.push_back(t);
  out.push_back(w_out);
  out.push_back(b_out);
  return out;
}

StepScaleSequence StepScaleSequence::build(int t_o,
                                           const std::vector<double>& action_factors) {
  int t_a = static_cast<int>(action_factors.size());
  int len = 1 + t_o + t_a;
  Tensor r({len});
  for (int i = 0; i < 1 + t_o; ++i) r.at(i) = 1.0;
  for (int i = 0; i < t_a; ++i) {
    if (!(action_factors[static_cast<size_t>(i)] > 0.0)) {
      throw NumericError("step scale: non-positive action factor");
    }
    r.at(1 + t_o + i) = action_factors[static_cast<size_t>(i)];
  }
  return StepScaleSequence{r};
}

StepScaleSequence StepScaleSequence::ones(int t_o, int t_a) {
  return build(t_o, std::vector<double>(static_cast<size_t>(t_a), 1.0));
}

void StepScaleSequence::validate(int expected_len) const {
  if (!r.defined() || r.ndim() != 1 || r.dim(0) != expected_len) {
    throw ShapeError("step scale: length " + (r.defined() ? shape_str(r.shape()) : "?") +
                     ", expected [" + std::to_string(expected_len) + "]");
  }
  for (double v : r.values()) {
    if (!(v > 0.0)) throw NumericError("step scale: entries must be positive");
  }
}

Tensor compute_delta_unscaled(const Tensor& u, const SsmCoreParams& p) {
  return ops::softplus(ops::linear(u, p.w_delta, p.b_delta));
}

Tensor compute_delta(const Tensor& u, const StepScaleSequence& r, const SsmCoreParams& p) {
  r.validate(u.dim(0));
  return ops::row_scale(compute_delta_unscaled(u, p), r.r);
}

Tensor mamba_r_forward(const Tensor& u_in, const StepScaleSequence& r,
                       const MambaRBlockParams& params) {
  int d_inner = params.conv_w.dim(0);
  Tensor x = ops::layernorm(u_in, params.ln_gain, params.ln_bias);
  Tensor proj = ops::linear(x, params.w_in, params.b_in);
  Tensor content = ops::slice_cols(proj, 0, d_inner);
  Tensor gate = ops::slice_cols(proj, d_inner, 2 * d_inner);
  Tensor c_act = ops::silu(ops::causal_conv1d(content, params.conv_w, params.conv_b));
  Tensor b_seq = ops::linear(c_act, params.ssm.w_b, params.ssm.b_b);
  Tensor c_seq = ops::linear(c_act, params.ssm.w_c, params.ssm.b_c);
  Tensor delta = compute_delta(c_act, r, params.ssm);
  auto [abar, bbar] = ops::zoh_discretize(params.ssm.a_diag(), b_seq, delta);
  Tensor y = ops::selective_scan(abar, bbar, c_seq, c_act);
  Tensor gated = ops::mul(y, ops::silu(gate));
  return ops::add(u_in, ops::linear(gated, params.w_out, params.b_out));
}

}  // namespace dispo
