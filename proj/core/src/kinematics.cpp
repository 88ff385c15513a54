#include "dispo/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace dispo {

Vec2 two_link_fk(double q1, double q2, double l1, double l2) {
  return {l1 * std::cos(q1) + l2 * std::cos(q1 + q2),
          l1 * std::sin(q1) + l2 * std::sin(q1 + q2)};
}

IkResult two_link_ik(const Vec2& p, double l1, double l2) {
  IkResult res;
  double x = p[0], y = p[1];
  double r = std::hypot(x, y);
  double r_min = std::abs(l1 - l2), r_max = l1 + l2;
  if (r < r_min || r > r_max) {
    res.clamped = true;
    double rc = std::clamp(r, r_min, r_max);
    if (r == 0.0) {
      x = rc;  // direction undefined at the origin; pick +x
      y = 0.0;
    } else {
      x *= rc / r;
      y *= rc / r;
    }
    r = rc;
  }
  double c2 = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  c2 = std::clamp(c2, -1.0, 1.0);
  res.q2 = std::acos(c2);
  res.q1 = std::atan2(y, x) - std::atan2(l2 * std::sin(res.q2), l1 + l2 * c2);
  return res;
}

}  // namespace dispo
