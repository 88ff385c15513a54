#pragma once

#include <vector>

#include "dispo/tensor.hpp"

namespace dispo {

// Mean squared error over all elements.
Tensor loss_mse(const Tensor& pred, const Tensor& target);

struct RncResult {
  Tensor loss;             // [1]; zero tensor when no pair exists
  int pair_count = 0;      // ordered (anchor, positive) pairs scored
  int skipped_groups = 0;  // groups with fewer than 2 variants
};

// Rank-ordered contrastive loss over one group of augmented variants of a
// single source window. features[i]: [D] on the tape; label_dist[i][j]:
// plain L2 distance between the denormalized action windows of variants i
// and j. For each anchor i and positive j != i the candidate set is
// {m != i : label_dist(i,m) >= label_dist(i,j)} (always contains j); the
// term is d(v_i,v_j)/tau + logsumexp_m(-d(v_i,v_m)/tau). Mean over pairs.
RncResult loss_rnc_group(const std::vector<Tensor>& features,
                         const std::vector<std::vector<double>>& label_dist, double tau);

// Batch version: groups of variant features with matching label-distance
// matrices; per-group means averaged over groups that have >= 2 variants.
RncResult loss_rnc(const std::vector<std::vector<Tensor>>& group_features,
                   const std::vector<std::vector<std::vector<double>>>& group_label_dist,
                   double tau);

// Plain L2 distance between two flattened value arrays, used for the label
// distances above.
double label_l2(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace dispo
