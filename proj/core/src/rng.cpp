#include "dispo/rng.hpp"

#include <cmath>

namespace dispo {

uint64_t mix_u64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Rng::uniform() {
  // 53 random bits -> double in [0, 1), the usual bit-exact construction.
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
  // Rejection-free modulo is biased; the span here is tiny relative to 2^64,
  // so use multiply-shift which is unbiased enough for 32-bit ranges and
  // identical across platforms.
  uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * span;
  return lo + static_cast<int>(m >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double mag = std::sqrt(-2.0 * std::log(u1));
  double ang = 2.0 * M_PI * u2;
  spare_ = mag * std::sin(ang);
  has_spare_ = true;
  return mag * std::cos(ang);
}

std::vector<double> Rng::normal_vec(size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = normal();
  return out;
}

}  // namespace dispo
