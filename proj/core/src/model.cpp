#include "dispo/model.hpp"

#include <cmath>
#include <stdexcept>

#include "dispo/ops.hpp"

namespace dispo {

void DiSPoConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (d_model < 1) fail("d_model must be positive");
  if (n_state < 1) fail("n_state must be positive");
  if (n_block < 2 || n_block % 2 != 0) fail("n_block must be even and >= 2");
  if (t_obs < 1) fail("t_obs must be positive");
  if (t_act < t_obs) fail("t_act must be >= t_obs");
  if (diffusion_steps < 1 || diffusion_steps > 100) {
    fail("diffusion_steps must be in [1, 100]");
  }
  if (d_obs < 1 || d_act < 1) fail("d_obs and d_act must be positive");
  if (conv_width < 1) fail("conv_width must be positive");
  if (expand < 1) fail("expand must be positive");
  if (tau_rnc <= 0.0) fail("tau_rnc must be positive");
  if (exec_index < 0 || exec_index > t_act) fail("exec_index out of range");
}

namespace {

Tensor param(Shape shape) { return Tensor(std::move(shape), true); }

Tensor embed_weight(int out_dim, int in_dim, Rng& rng) {
  Tensor w = param({out_dim, in_dim});
  double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  return w;
}

Tensor small_normal(int d, Rng& rng) {
  Tensor t = param({d});
  for (double& v : t.values()) v = 0.02 * rng.normal();
  return t;
}

}  // namespace

DiSPoModel DiSPoModel::init(const DiSPoConfig& cfg, Rng& rng) {
  cfg.validate();
  DiSPoModel m;
  m.cfg = cfg;
  m.w_obs = embed_weight(cfg.d_model, cfg.d_obs, rng);
  m.b_obs = param({cfg.d_model});
  m.w_act = embed_weight(cfg.d_model, cfg.d_act, rng);
  m.b_act = param({cfg.d_model});
  m.lambda_k = small_normal(cfg.d_model, rng);
  m.lambda_obs = small_normal(cfg.d_model, rng);
  m.lambda_act = small_normal(cfg.d_model, rng);
  for (int i = 0; i < cfg.n_block; ++i) {
    m.blocks.push_back(
        MambaRBlockParams::init(cfg.d_model, cfg.d_inner(), cfg.n_state, cfg.conv_width, rng));
  }
  m.head_ln_gain =
      Tensor({cfg.d_model}, std::vector<double>(static_cast<size_t>(cfg.d_model), 1.0), true);
  m.head_ln_bias = param({cfg.d_model});
  m.head_w = embed_weight(cfg.d_act, cfg.d_model, rng);
  m.head_b = param({cfg.d_act});
  m.schedule = NoiseSchedule::make(cfg.schedule_kind, cfg.diffusion_steps);
  return m;
}

std::vector<Tensor> DiSPoModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) {
    (void)name;
    out.push_back(t);
  }
  return out;
}

std::vector<std::pair<std::string, Tensor>> DiSPoModel::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out = {
      {"w_obs", w_obs},         {"b_obs", b_obs},
      {"w_act", w_act},         {"b_act", b_act},
      {"lambda_k", lambda_k},   {"lambda_obs", lambda_obs},
      {"lambda_act", lambda_act}};
  for (size_t i = 0; i < blocks.size(); ++i) {
    const MambaRBlockParams& b = blocks[i];
    std::string p = "block" + std::to_string(i) + ".";
    out.emplace_back(p + "ln_gain", b.ln_gain);
    out.emplace_back(p + "ln_bias", b.ln_bias);
    out.emplace_back(p + "w_in", b.w_in);
    out.emplace_back(p + "b_in", b.b_in);
    out.emplace_back(p + "conv_w", b.conv_w);
    out.emplace_back(p + "conv_b", b.conv_b);
    out.emplace_back(p + "a_log", b.ssm.a_log);
    out.emplace_back(p + "w_b", b.ssm.w_b);
    out.emplace_back(p + "b_b", b.ssm.b_b);
    out.emplace_back(p + "w_c", b.ssm.w_c);
    out.emplace_back(p + "b_c", b.ssm.b_c);
    out.emplace_back(p + "w_delta", b.ssm.w_delta);
    out.emplace_back(p + "b_delta", b.ssm.b_delta);
    out.emplace_back(p + "w_out", b.w_out);
    out.emplace_back(p + "b_out", b.b_out);
  }
  out.emplace_back("head_ln_gain", head_ln_gain);
  out.emplace_back("head_ln_bias", head_ln_bias);
  out.emplace_back("head_w", head_w);
  out.emplace_back("head_b", head_b);
  return out;
}

Tensor diffusion_step_encoding(int k, int d) {
  Tensor pe({1, d});
  for (int i = 0; i < d / 2; ++i) {
    double freq = std::pow(10000.0, -2.0 * i / d);
    pe.at(0, 2 * i) = std::sin(k * freq);
    pe.at(0, 2 * i + 1) = std::cos(k * freq);
  }
  if (d % 2 == 1) {
    double freq = std::pow(10000.0, -static_cast<double>(d - 1) / d);
    pe.at(0, d - 1) = std::sin(k * freq);
  }
  return pe;
}

Tensor encode_inputs(int k, const Tensor& obs, const Tensor& act_noisy,
                     const DiSPoModel& model) {
  const DiSPoConfig& c = model.cfg;
  if (obs.ndim() != 2 || obs.dim(0) != c.t_obs || obs.dim(1) != c.d_obs) {
    throw ShapeError("encode_inputs: obs " + shape_str(obs.shape()) + ", expected [" +
                     std::to_string(c.t_obs) + "x" + std::to_string(c.d_obs) + "]");
  }
  if (act_noisy.ndim() != 2 || act_noisy.dim(0) != c.t_act || act_noisy.dim(1) != c.d_act) {
    throw ShapeError("encode_inputs: actions " + shape_str(act_noisy.shape()) +
                     ", expected [" + std::to_string(c.t_act) + "x" +
                     std::to_string(c.d_act) + "]");
  }
  Tensor row_k = ops::add(diffusion_step_encoding(k, c.d_model), model.lambda_k);
  Tensor rows_obs = ops::add(ops::linear(obs, model.w_obs, model.b_obs), model.lambda_obs);
  Tensor rows_act =
      ops::add(ops::linear(act_noisy, model.w_act, model.b_act), model.lambda_act);
  return ops::concat_rows({row_k, rows_obs, rows_act});
}

std::vector<std::pair<int, int>> skip_pairs(int n_block) {
  std::vector<std::pair<int, int>> out;
  for (int i = 1; i <= n_block / 2; ++i) out.emplace_back(i, n_block - i + 1);
  return out;
}

ForwardResult forward_noise_pred(const Tensor& obs, const Tensor& act_noisy,
                                 const StepScaleSequence& r, int k,
                                 const DiSPoModel& model) {
  const DiSPoConfig& c = model.cfg;
  if (k < 1 || k > c.diffusion_steps) {
    throw std::invalid_argument("forward_noise_pred: k=" + std::to_string(k) +
                                " outside 1.." + std::to_string(c.diffusion_steps));
  }
  r.validate(c.seq_len());
  Tensor u = encode_inputs(k, obs, act_noisy, model);
  int half = c.n_block / 2;
  std::vector<Tensor> block_out(static_cast<size_t>(c.n_block) + 1);
  Tensor mid;
  for (int i = 1; i <= c.n_block; ++i) {
    if (i > half) {
      u = ops::add(u, block_out[static_cast<size_t>(c.n_block - i + 1)]);
    }
    u = mamba_r_forward(u, r, model.blocks[static_cast<size_t>(i - 1)]);
    block_out[static_cast<size_t>(i)] = u;
    if (i == half) mid = u;
  }
  Tensor tail = ops::slice_rows(u, 1 + c.t_obs, c.seq_len());
  Tensor normed = ops::layernorm(tail, model.head_ln_gain, model.head_ln_bias);
  Tensor eps_hat = ops::linear(normed, model.head_w, model.head_b);
  return ForwardResult{eps_hat, mid};
}

}  // namespace dispo
