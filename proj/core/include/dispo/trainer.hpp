#pragma once

#include "dispo/dataset.hpp"
#include "dispo/model.hpp"
#include "dispo/optim.hpp"
#include "dispo/rng.hpp"

namespace dispo {

struct TrainConfig {
  int batch_size = 64;
  int steps_per_epoch = 0;  // 0 = one pass worth: ceil(total windows / batch)
};

struct EpochMetrics {
  double l_mse = 0.0;   // mean per-variant MSE, unweighted
  double l_rnc = 0.0;   // mean per-group rank-contrast loss, unweighted
  double l_total = 0.0; // w_mse * L_MSE + w_rnc * L_RNC
  int steps = 0;
  int skipped_variants = 0;
};

// One epoch of noise-prediction training with rate-augmented variant groups.
// Each optimizer step draws its windows, a single diffusion step k shared by
// the whole batch, and the forward-process noise, in that order, from `rng`.
// Non-finite losses abort with diagnostics before the parameters update.
EpochMetrics train_epoch(const Dataset& ds, DiSPoModel& model, AdamW& opt,
                         const TrainConfig& tc, const AugmentConfig& aug, Rng& rng);

}  // namespace dispo
