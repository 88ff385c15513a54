#include "dispo/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dispo/ops.hpp"

namespace dispo {

Tensor loss_mse(const Tensor& pred, const Tensor& target) {
  Tensor d = ops::sub(pred, target);
  return ops::mean_all(ops::mul(d, d));
}

double label_l2(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("label_l2: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

RncResult loss_rnc_group(const std::vector<Tensor>& features,
                         const std::vector<std::vector<double>>& label_dist, double tau) {
  size_t v = features.size();
  RncResult res;
  if (v < 2) {
    res.loss = Tensor::scalar(0.0);
    res.skipped_groups = 1;
    return res;
  }
  if (label_dist.size() != v) {
    throw std::invalid_argument("loss_rnc: label matrix does not match variant count");
  }
  // Feature distances once per unordered pair; reused across anchor terms.
  std::vector<std::vector<Tensor>> fd(v, std::vector<Tensor>(v));
  for (size_t i = 0; i < v; ++i) {
    for (size_t j = i + 1; j < v; ++j) {
      fd[i][j] = ops::l2_dist(features[i], features[j]);
      fd[j][i] = fd[i][j];
    }
  }
  Tensor total = Tensor::scalar(0.0);
  int pairs = 0;
  for (size_t i = 0; i < v; ++i) {
    for (size_t j = 0; j < v; ++j) {
      if (j == i) continue;
      // Candidates ranked no closer to the anchor than the positive, by
      // action distance. j itself always qualifies.
      std::vector<size_t> cand;
      for (size_t m = 0; m < v; ++m) {
        if (m == i) continue;
        if (label_dist[i][m] >= label_dist[i][j]) cand.push_back(m);
      }
      // Stable logsumexp of -d_m/tau over the candidates: shift by the max
      // exponent (a constant, so the identity and its gradient are exact).
      double shift = -1e300;
      for (size_t m : cand) shift = std::max(shift, -fd[i][m].item() / tau);
      Tensor sum_exp = Tensor::scalar(0.0);
      for (size_t m : cand) {
        Tensor e = ops::exp(
            ops::add(ops::scale(fd[i][m], -1.0 / tau), Tensor::scalar(-shift)));
        sum_exp = ops::add(sum_exp, e);
      }
      Tensor lse = ops::add(ops::log(sum_exp), Tensor::scalar(shift));
      Tensor term = ops::add(ops::scale(fd[i][j], 1.0 / tau), lse);
      total = ops::add(total, term);
      ++pairs;
    }
  }
  res.loss = ops::scale(total, 1.0 / pairs);
  res.pair_count = pairs;
  return res;
}

RncResult loss_rnc(const std::vector<std::vector<Tensor>>& group_features,
                   const std::vector<std::vector<std::vector<double>>>& group_label_dist,
                   double tau) {
  if (group_features.size() != group_label_dist.size()) {
    throw std::invalid_argument("loss_rnc: group counts differ");
  }
  RncResult res;
  Tensor total = Tensor::scalar(0.0);
  int scored = 0;
  for (size_t g = 0; g < group_features.size(); ++g) {
    RncResult r = loss_rnc_group(group_features[g], group_label_dist[g], tau);
    res.pair_count += r.pair_count;
    res.skipped_groups += r.skipped_groups;
    if (r.pair_count > 0) {
      total = ops::add(total, r.loss);
      ++scored;
    }
  }
  res.loss = scored > 0 ? ops::scale(total, 1.0 / scored) : Tensor::scalar(0.0);
  return res;
}

}  // namespace dispo
