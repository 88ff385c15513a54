#pragma once

#include <string>
#include <vector>

#include "dispo/tensor.hpp"

namespace dispo {

struct AdamWConfig {
  double lr = 3e-4;
  double weight_decay = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Decoupled-weight-decay Adam over a fixed parameter list. Moment buffers are
// allocated lazily on the first step and keyed by position, so the parameter
// list must not change between steps.
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, AdamWConfig cfg);

  // Applies one update from the gradients currently in each parameter's .grad
  // buffer. Grads are left untouched; callers zero them afterwards.
  void step();
  void zero_grad();

  int64_t step_count() const { return step_; }
  const std::vector<Tensor>& params() const { return params_; }
  const AdamWConfig& config() const { return cfg_; }
  AdamWConfig& config() { return cfg_; }

  // Moment buffers, exposed for checkpointing.
  std::vector<std::vector<double>>& moments1() { return m_; }
  std::vector<std::vector<double>>& moments2() { return v_; }
  void set_step_count(int64_t s) { step_ = s; }

 private:
  std::vector<Tensor> params_;
  AdamWConfig cfg_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  int64_t step_ = 0;
};

}  // namespace dispo
