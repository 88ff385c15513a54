#include "dispo/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace dispo {

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.resize(params_.size());
  v_.resize(params_.size());
  for (size_t i = 0; i < params_.size(); ++i) {
    size_t n = static_cast<size_t>(params_[i].size());
    m_[i].assign(n, 0.0);
    v_[i].assign(n, 0.0);
  }
}

void AdamW::step() {
  ++step_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t p = 0; p < params_.size(); ++p) {
    Tensor& t = params_[p];
    if (!t.has_grad()) {
      throw std::runtime_error("adamw_step: parameter " + std::to_string(p) +
                               " has no gradient");
    }
    const std::vector<double>& g = t.grad();
    std::vector<double>& m = m_[p];
    std::vector<double>& v = v_[p];
    double* w = t.data();
    for (size_t i = 0; i < g.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      w[i] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * w[i]);
    }
  }
}

void AdamW::zero_grad() {
  for (Tensor& t : params_) t.zero_grad();
}

}  // namespace dispo
