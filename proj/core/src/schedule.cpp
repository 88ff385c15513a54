#include "dispo/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace dispo {

NoiseSchedule NoiseSchedule::squared_cosine(int K) {
  if (K < 1 || K > 100) {
    throw std::invalid_argument("noise schedule: K must be in [1, 100], got " +
                                std::to_string(K));
  }
  constexpr double kS = 0.008;
  auto f = [&](double k) {
    double t = (k / K + kS) / (1.0 + kS) * M_PI / 2.0;
    double c = std::cos(t);
    return c * c;
  };
  NoiseSchedule sch;
  sch.steps = K;
  sch.alpha.assign(static_cast<size_t>(K) + 1, 0.0);
  sch.beta.assign(static_cast<size_t>(K) + 1, 0.0);
  sch.alpha_bar.assign(static_cast<size_t>(K) + 1, 1.0);
  sch.sigma2.assign(static_cast<size_t>(K) + 1, 0.0);
  double f0 = f(0.0);
  double prev_bar = 1.0;
  for (int k = 1; k <= K; ++k) {
    double bar = f(static_cast<double>(k)) / f0;
    double b = 1.0 - bar / prev_bar;
    if (b > 0.999) b = 0.999;
    sch.beta[static_cast<size_t>(k)] = b;
    sch.alpha[static_cast<size_t>(k)] = 1.0 - b;
    // Running product instead of f(k)/f(0): the cap above would otherwise
    // leave alpha and alpha_bar inconsistent at the tail.
    sch.alpha_bar[static_cast<size_t>(k)] =
        sch.alpha_bar[static_cast<size_t>(k) - 1] * (1.0 - b);
    prev_bar = bar;
  }
  for (int k = 1; k <= K; ++k) {
    double ab_prev = sch.alpha_bar[static_cast<size_t>(k) - 1];
    double ab = sch.alpha_bar[static_cast<size_t>(k)];
    sch.sigma2[static_cast<size_t>(k)] =
        sch.beta[static_cast<size_t>(k)] * (1.0 - ab_prev) / (1.0 - ab);
  }
  return sch;
}

NoiseSchedule NoiseSchedule::make(const std::string& kind, int K) {
  if (kind == "squared_cosine") return squared_cosine(K);
  throw std::invalid_argument("noise schedule: unknown kind '" + kind + "'");
}

}  // namespace dispo
