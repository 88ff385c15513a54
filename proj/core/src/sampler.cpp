#include "dispo/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dispo {

NoisedPair ddpm_training_pair(const Tensor& a0, int k, const NoiseSchedule& sched, Rng& rng) {
  if (k < 1 || k > sched.steps) {
    throw std::out_of_range("ddpm_training_pair: k " + std::to_string(k) + " outside 1.." +
                            std::to_string(sched.steps));
  }
  int n = static_cast<int>(numel(a0.shape()));
  std::vector<double> noise = rng.normal_vec(static_cast<size_t>(n));
  double sa = std::sqrt(sched.alpha_bar[static_cast<size_t>(k)]);
  double sb = std::sqrt(1.0 - sched.alpha_bar[static_cast<size_t>(k)]);
  Tensor a_k(a0.shape());
  Tensor eps(a0.shape());
  for (int i = 0; i < n; ++i) {
    eps.data()[static_cast<size_t>(i)] = noise[static_cast<size_t>(i)];
    a_k.data()[static_cast<size_t>(i)] =
        sa * a0.data()[static_cast<size_t>(i)] + sb * noise[static_cast<size_t>(i)];
  }
  return {a_k, eps};
}

Tensor ddpm_sample(const Tensor& obs, const StepScaleSequence& r, const DiSPoModel& model,
                   Rng& rng) {
  const NoiseSchedule& sched = model.schedule;
  int t_a = model.cfg.t_act, d_act = model.cfg.d_act;
  int n = t_a * d_act;
  Tensor a({t_a, d_act});
  std::vector<double> init = rng.normal_vec(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) a.data()[static_cast<size_t>(i)] = init[static_cast<size_t>(i)];

  for (int k = sched.steps; k >= 1; --k) {
    ForwardResult fw = forward_noise_pred(obs, a, r, k, model);
    double alpha = sched.alpha[static_cast<size_t>(k)];
    double beta = sched.beta[static_cast<size_t>(k)];
    double abar = sched.alpha_bar[static_cast<size_t>(k)];
    double coef = beta / std::sqrt(1.0 - abar);
    double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    double sigma = std::sqrt(sched.sigma2[static_cast<size_t>(k)]);
    std::vector<double> z;
    if (k > 1) z = rng.normal_vec(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      double v = inv_sqrt_alpha * (a.data()[static_cast<size_t>(i)] -
                                   coef * fw.eps_hat.data()[static_cast<size_t>(i)]);
      if (k > 1) v += sigma * z[static_cast<size_t>(i)];
      a.data()[static_cast<size_t>(i)] = v;
    }
  }
  for (int i = 0; i < n; ++i) {
    double& v = a.data()[static_cast<size_t>(i)];
    v = std::max(-1.0, std::min(1.0, v));
  }
  return a;
}

std::vector<double> RactSpec::action_factors(int t_obs, int t_act) const {
  if (!(factor > 0.0) || (ramp && !(ramp_end > 0.0))) {
    throw std::invalid_argument("step-scale factors must be positive");
  }
  std::vector<double> f(static_cast<size_t>(t_act), 1.0);
  int tail = t_act - t_obs;
  for (int i = 0; i < tail; ++i) {
    double v = factor;
    if (ramp && tail > 1) v = factor + (ramp_end - factor) * i / (tail - 1);
    if (ramp && tail == 1) v = ramp_end;
    f[static_cast<size_t>(t_obs + i)] = v;
  }
  return f;
}

std::vector<std::vector<double>> sample_action_window(
    const std::vector<std::vector<double>>& obs_history, const RactSpec& spec,
    const DiSPoModel& model, const Normalizer& norm, Rng& rng) {
  if (obs_history.empty()) throw std::invalid_argument("inference: empty obs history");
  int t_o = model.cfg.t_obs;
  Tensor obs({t_o, model.cfg.d_obs});
  for (int s = 0; s < t_o; ++s) {
    // Rows align so the newest observation lands in the last slot; short
    // histories repeat the earliest sample.
    long src = static_cast<long>(obs_history.size()) - t_o + s;
    if (src < 0) src = 0;
    std::vector<double> row = norm.normalize_obs(obs_history[static_cast<size_t>(src)]);
    if (static_cast<int>(row.size()) != model.cfg.d_obs) {
      throw std::invalid_argument("inference: observation width mismatch");
    }
    for (int j = 0; j < model.cfg.d_obs; ++j) obs.at(s, j) = row[static_cast<size_t>(j)];
  }
  StepScaleSequence r =
      StepScaleSequence::build(t_o, spec.action_factors(t_o, model.cfg.t_act));
  Tensor a0 = ddpm_sample(obs, r, model, rng);
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<size_t>(model.cfg.t_act));
  for (int s = 0; s < model.cfg.t_act; ++s) {
    std::vector<double> row(static_cast<size_t>(model.cfg.d_act));
    for (int j = 0; j < model.cfg.d_act; ++j) row[static_cast<size_t>(j)] = a0.at(s, j);
    out.push_back(norm.denormalize_act(row));
  }
  return out;
}

std::vector<double> infer_next_action(const std::vector<std::vector<double>>& obs_history,
                                      const RactSpec& spec, const DiSPoModel& model,
                                      const Normalizer& norm, Rng& rng) {
  std::vector<std::vector<double>> window =
      sample_action_window(obs_history, spec, model, norm, rng);
  int idx = model.cfg.executed_index();
  if (idx < 1 || idx > model.cfg.t_act) {
    throw std::out_of_range("inference: executed index outside the action window");
  }
  return window[static_cast<size_t>(idx - 1)];
}

}  // namespace dispo
