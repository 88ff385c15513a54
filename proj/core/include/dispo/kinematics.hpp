#pragma once

#include <array>

namespace dispo {

using Vec2 = std::array<double, 2>;

// p = (l1 cos q1 + l2 cos(q1+q2), l1 sin q1 + l2 sin(q1+q2)).
Vec2 two_link_fk(double q1, double q2, double l1, double l2);

struct IkResult {
  double q1 = 0.0;
  double q2 = 0.0;
  bool clamped = false;  // target was radially clamped onto the reachable annulus
};

// Elbow-up analytic inverse (q2 in [0, pi]). Unreachable targets clamp along
// the ray from the origin to the nearest reachable radius.
IkResult two_link_ik(const Vec2& p, double l1, double l2);

}  // namespace dispo
