#include <cmath>

#include <doctest.h>

#include "dispo/envs.hpp"

using namespace dispo;

TEST_CASE("tap targets alternate left and right") {
  const auto& t = SideTapEnv::targets();
  REQUIRE(t.size() == 4);
  CHECK(t[0] == Vec2{-0.6, 0.3});
  CHECK(t[1] == Vec2{0.6, 0.3});
  CHECK(t[2] == Vec2{-0.6, 0.3});
  CHECK(t[3] == Vec2{0.6, 0.3});
}

TEST_CASE("stepping onto the current target registers a tap") {
  SideTapEnv env;
  env.reset({0.5, 0.5});
  env.step({-0.6, 0.3});
  CHECK(env.taps() == 1);
  CHECK(env.steps() == 1);
  env.step({0.6, 0.3});
  CHECK(env.taps() == 2);
}

TEST_CASE("stepping onto the wrong target leaves the count unchanged") {
  SideTapEnv env;
  env.reset({0.5, 0.5});
  env.step({0.6, 0.3});  // right target first is out of order
  CHECK(env.taps() == 0);
  env.step({-0.6, 0.3});
  CHECK(env.taps() == 1);
}

TEST_CASE("near misses within the tap radius count; outside they do not") {
  SideTapEnv env;
  env.reset({0.5, 0.5});
  env.step({-0.6 + kTapRadius * 0.9, 0.3});
  CHECK(env.taps() == 1);
  env.reset({0.5, 0.5});
  env.step({-0.6 + kTapRadius * 1.8, 0.3});
  CHECK(env.taps() == 0);
}

TEST_CASE("episode ends at the step cap regardless of taps") {
  SideTapEnv env;
  env.reset({0.5, 0.5});
  for (int i = 0; i < kSideTapMaxSteps; ++i) {
    CHECK_FALSE(env.done());
    env.step({0.0, 0.9});
  }
  CHECK(env.done());
  CHECK(env.steps() == 60);
  CHECK(env.taps() == 0);
}

TEST_CASE("episode ends at four taps") {
  SideTapEnv env;
  env.reset({0.5, 0.5});
  for (int i = 0; i < 4; ++i) env.step(SideTapEnv::targets()[static_cast<size_t>(i)]);
  CHECK(env.done());
  CHECK(env.taps() == 4);
}

TEST_CASE("observation is (q1, q2, taps/4)") {
  SideTapEnv env;
  env.reset({0.25, -0.5});
  auto o = env.observe();
  REQUIRE(o.size() == 3);
  CHECK(o[0] == 0.25);
  CHECK(o[1] == -0.5);
  CHECK(o[2] == 0.0);
  env.step({-0.6, 0.3});
  CHECK(env.observe()[2] == 0.25);
}

TEST_CASE("side tapping score formula") {
  CHECK(side_tapping_score(4, 40, 40) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(side_tapping_score(4, 50, 40) == doctest::Approx(0.90).epsilon(1e-12));
  CHECK(side_tapping_score(0, 60, 40) == doctest::Approx(-0.20).epsilon(1e-12));
  CHECK(side_tapping_score(4, 35, 40) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(side_tapping_score(1, 60, 10) == doctest::Approx(-0.20).epsilon(1e-12));
}

TEST_CASE("sampled side-tap inits start from the reachable box") {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    SideTapEnv::Init init = SideTapEnv::sample_init(rng);
    Vec2 p = two_link_fk(init.q1, init.q2, kLink1, kLink2);
    CHECK(p[0] >= -0.4 - 1e-9);
    CHECK(p[0] <= 0.4 + 1e-9);
    CHECK(p[1] >= 0.2 - 1e-9);
    CHECK(p[1] <= 0.8 + 1e-9);
  }
}

TEST_CASE("draw env appends one point per step and repeats are allowed") {
  DrawEnv env;
  DrawEnv::Init init;
  init.shape = ShapeSpec{};
  init.start_vertex = 0;
  env.reset(init);
  REQUIRE(env.path().size() == 1);
  Vec2 p = env.pos();
  env.step(p);
  CHECK(env.path().size() == 2);
  CHECK(env.path()[1] == p);
  CHECK(env.steps() == 1);
}

TEST_CASE("out-of-workspace actions clamp to the boundary and are flagged") {
  DrawEnv env;
  env.reset({ShapeSpec{}, 0});
  env.step({2.0, 0.5});
  CHECK(env.pos()[0] == 1.0);
  CHECK(env.pos()[1] == 0.5);
  CHECK(env.clamped() == 1);
}

TEST_CASE("draw episode ends after 80 steps") {
  DrawEnv env;
  env.reset({ShapeSpec{}, 0});
  for (int i = 0; i < kDrawMaxSteps; ++i) {
    CHECK_FALSE(env.done());
    env.step({0.0, 0.0});
  }
  CHECK(env.done());
  CHECK(env.steps() == 80);
}

TEST_CASE("draw observation is position plus shape parameters") {
  ShapeSpec s;
  s.kind = ShapeKind::rect;
  s.center = {0.1, -0.1};
  s.half = {0.3, 0.4};
  DrawEnv env;
  env.reset({s, 1});
  auto o = env.observe();
  REQUIRE(o.size() == 7);
  CHECK(o[0] == env.pos()[0]);
  CHECK(o[1] == env.pos()[1]);
  CHECK(o[2] == 0.1);
  CHECK(o[3] == -0.1);
  CHECK(o[4] == 0.3);
  CHECK(o[5] == 0.4);
  CHECK(o[6] == 0.0);
}

TEST_CASE("rect outline is the closed corner loop; start vertex picks the corner") {
  ShapeSpec s;
  s.kind = ShapeKind::rect;
  s.center = {0.0, 0.0};
  s.half = {0.3, 0.4};
  auto pts = s.outline();
  REQUIRE(pts.size() == 5);
  CHECK(pts[0] == Vec2{-0.3, -0.4});
  CHECK(pts[2] == Vec2{0.3, 0.4});
  CHECK(pts[4] == pts[0]);
  DrawEnv env;
  env.reset({s, 2});
  CHECK(env.pos() == pts[2]);
}

TEST_CASE("arc outline uses near-unit chords with exact endpoints") {
  ShapeSpec s;
  s.kind = ShapeKind::arc;
  s.center = {0.0, 0.0};
  s.radius = 0.4;
  s.a0 = 0.5;
  s.a1 = 0.5 + 2.5;
  auto pts = s.outline();
  int n = static_cast<int>(std::ceil(2.5 * 0.4 / kExpertSpeed));
  REQUIRE(static_cast<int>(pts.size()) == n + 1);
  CHECK(pts[0][0] == doctest::Approx(0.4 * std::cos(0.5)).epsilon(1e-12));
  CHECK(pts.back()[1] == doctest::Approx(0.4 * std::sin(3.0)).epsilon(1e-12));
  for (const auto& p : pts)
    CHECK(std::hypot(p[0], p[1]) == doctest::Approx(0.4).epsilon(1e-12));
  for (size_t i = 1; i < pts.size(); ++i) {
    double chord = std::hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);
    CHECK(chord <= kExpertSpeed + 1e-9);
  }
}

TEST_CASE("sampled shapes stay within their documented parameter ranges") {
  Rng rng(15);
  for (int i = 0; i < 30; ++i) {
    ShapeSpec r = ShapeSpec::sample_rect(rng);
    CHECK(std::abs(r.center[0]) <= 0.2);
    CHECK(r.half[0] >= 0.25);
    CHECK(r.half[1] <= 0.45);
    ShapeSpec a = ShapeSpec::sample_arc(rng);
    CHECK(a.radius >= 0.3);
    CHECK(a.radius <= 0.5);
    double span = a.a1 - a.a0;
    CHECK(span >= 2.0 * 3.14159265 / 3.0 - 1e-9);
    CHECK(span <= 1.5 * 3.1415927 + 1e-9);
  }
}

TEST_CASE("task registry") {
  CHECK(task_info("side_tap").d_obs == 3);
  CHECK(task_info("side_tap").max_steps == 60);
  CHECK(task_info("draw_rect").d_obs == 7);
  CHECK(task_info("draw_arc").max_steps == 80);
  CHECK(task_info("draw_rect").d_act == 2);
  CHECK_THROWS(task_info("juggling"));
}
