#pragma once

#include <string>

#include "dispo/dataset.hpp"
#include "dispo/model.hpp"

namespace dispo {

// On-disk model snapshot: <dir>/manifest.json names every parameter with its
// shape and byte offset into <dir>/weights.bin, a little-endian float32 blob
// in manifest order. The manifest also carries the model config, the noise
// schedule identity, the normalizer bounds, and the native demo rate.
struct Checkpoint {
  DiSPoModel model;
  Normalizer norm;
  double native_rate = 1.0;
};

void save_checkpoint(const std::string& dir, const DiSPoModel& model, const Normalizer& norm,
                     double native_rate);

Checkpoint load_checkpoint(const std::string& dir);

}  // namespace dispo
