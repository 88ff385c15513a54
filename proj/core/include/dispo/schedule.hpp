#pragma once

#include <string>
#include <vector>

namespace dispo {

// Diffusion noise schedule, 1-indexed over k = 1..K. alpha_bar[0] = 1 is the
// clean-data anchor. Built from the squared-cosine profile with the usual
// 0.999 cap on beta, then alpha_bar recomputed as the running product so the
// invariants hold after capping.
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> alpha;      // size K+1, [0] unused
  std::vector<double> beta;       // size K+1, [0] unused
  std::vector<double> alpha_bar;  // size K+1, alpha_bar[0] = 1
  std::vector<double> sigma2;     // size K+1, posterior variance, sigma2[1] = 0

  static NoiseSchedule squared_cosine(int K);
  static NoiseSchedule make(const std::string& kind, int K);
};

}  // namespace dispo
