#include "dispo/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dispo/losses.hpp"
#include "dispo/ops.hpp"
#include "dispo/sampler.hpp"
#include "dispo/tape.hpp"

namespace dispo {

EpochMetrics train_epoch(const Dataset& ds, DiSPoModel& model, AdamW& opt,
                         const TrainConfig& tc, const AugmentConfig& aug, Rng& rng) {
  const DiSPoConfig& cfg = model.cfg;
  long total_windows = 0;
  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    total_windows += ds.window_count(static_cast<int>(i), cfg.t_obs, cfg.t_act);
  }
  if (total_windows == 0) throw std::runtime_error("train_epoch: no usable window");
  int steps = tc.steps_per_epoch > 0
                  ? tc.steps_per_epoch
                  : static_cast<int>((total_windows + tc.batch_size - 1) / tc.batch_size);

  std::vector<Tensor> params = model.parameters();
  EpochMetrics em;
  for (int step = 0; step < steps; ++step) {
    BatchStats stats;
    std::vector<WindowGroup> groups =
        make_training_batch(ds, cfg, aug, tc.batch_size, rng, &stats);
    em.skipped_variants += stats.skipped_variants;
    int k = rng.uniform_int(1, cfg.diffusion_steps);

    // All stochastic draws for the step happen here, in batch order, so the
    // later graph work cannot perturb the stream.
    std::vector<std::vector<NoisedPair>> noised(groups.size());
    int total_variants = 0;
    int scored_groups = 0;
    for (size_t g = 0; g < groups.size(); ++g) {
      for (const AugmentedWindow& w : groups[g].variants) {
        noised[g].push_back(ddpm_training_pair(w.act, k, model.schedule, rng));
      }
      total_variants += static_cast<int>(groups[g].variants.size());
      if (groups[g].variants.size() >= 2) ++scored_groups;
    }
    if (total_variants == 0) throw std::runtime_error("train_epoch: empty batch");
    bool use_rnc = cfg.w_rnc != 0.0 && scored_groups > 0;

    opt.zero_grad();
    double step_mse = 0.0, step_rnc = 0.0;
    for (size_t g = 0; g < groups.size(); ++g) {
      const WindowGroup& group = groups[g];
      GradStore store;
      {
        Tape tape;
        Tensor mse_sum;
        std::vector<Tensor> feats;
        for (size_t v = 0; v < group.variants.size(); ++v) {
          const AugmentedWindow& w = group.variants[v];
          StepScaleSequence r = StepScaleSequence::build(cfg.t_obs, w.r_act);
          ForwardResult fw = forward_noise_pred(w.obs, noised[g][v].a_k, r, k, model);
          Tensor mse = loss_mse(fw.eps_hat, noised[g][v].eps);
          mse_sum = mse_sum.defined() ? ops::add(mse_sum, mse) : mse;
          if (use_rnc && group.variants.size() >= 2) {
            feats.push_back(ops::mean_rows(
                ops::slice_rows(fw.mid_feature, 1 + cfg.t_obs, cfg.seq_len())));
          }
        }
        step_mse += mse_sum.item() / total_variants;
        Tensor group_loss = ops::scale(mse_sum, cfg.w_mse / total_variants);
        if (use_rnc && group.variants.size() >= 2) {
          std::vector<std::vector<double>> ldist(
              group.variants.size(), std::vector<double>(group.variants.size(), 0.0));
          for (size_t i = 0; i < group.variants.size(); ++i) {
            for (size_t j = i + 1; j < group.variants.size(); ++j) {
              double d = label_l2(group.variants[i].act_denorm,
                                  group.variants[j].act_denorm);
              ldist[i][j] = d;
              ldist[j][i] = d;
            }
          }
          RncResult rnc = loss_rnc_group(feats, ldist, cfg.tau_rnc);
          step_rnc += rnc.loss.item() / scored_groups;
          group_loss = ops::add(group_loss, ops::scale(rnc.loss, cfg.w_rnc / scored_groups));
        }
        tape.backward_into(group_loss, store);
      }
      for (Tensor& p : params) {
        const std::vector<double>* gp = store.find(p.node());
        if (!gp) continue;
        std::vector<double>& dst = p.grad();
        for (size_t i = 0; i < dst.size(); ++i) dst[i] += (*gp)[i];
      }
    }

    double step_total = cfg.w_mse * step_mse + cfg.w_rnc * step_rnc;
    if (!std::isfinite(step_total)) {
      throw NumericError("train_epoch: non-finite loss at step " + std::to_string(step) +
                         " (L_MSE=" + std::to_string(step_mse) +
                         ", L_RNC=" + std::to_string(step_rnc) + ")");
    }
    opt.step();
    em.l_mse += step_mse;
    em.l_rnc += step_rnc;
    em.l_total += step_total;
    ++em.steps;
  }
  em.l_mse /= em.steps;
  em.l_rnc /= em.steps;
  em.l_total /= em.steps;
  return em;
}

}  // namespace dispo
