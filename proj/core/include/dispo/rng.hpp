#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dispo {

// SplitMix64 finalizer, used to decorrelate derived seeds.
uint64_t mix_u64(uint64_t x);

// Deterministic random source. Gaussian draws use Box-Muller directly instead
// of std::normal_distribution, whose output differs across standard library
// implementations; this keeps artifacts bit-identical everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(mix_u64(seed)) {}

  // Independent child stream: hashes (seed, tag) so streams derived with
  // different tags never overlap in practice.
  Rng derive(uint64_t tag) const { return Rng(mix_u64(seed_ + mix_u64(tag + 1))); }

  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  int uniform_int(int lo, int hi);       // [lo, hi] inclusive
  double normal();                       // standard normal
  std::vector<double> normal_vec(size_t n);

  uint64_t next_u64() { return gen_(); }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dispo
