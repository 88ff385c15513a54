#pragma once

#include <string>
#include <vector>

#include "dispo/dataset.hpp"
#include "dispo/kinematics.hpp"
#include "dispo/raster.hpp"
#include "dispo/rng.hpp"

namespace dispo {

inline constexpr double kLink1 = 0.6;
inline constexpr double kLink2 = 0.5;
inline constexpr double kTapRadius = 0.08;
inline constexpr int kSideTapMaxSteps = 60;
inline constexpr int kDrawMaxSteps = 80;
inline constexpr double kExpertSpeed = 0.1;  // workspace units per unit time
inline constexpr int kDwellUnits = 2;        // pause at waypoints, in time units

// Two-link arm tapping (-0.6, 0.3) and (0.6, 0.3) alternately, twice each.
// Actions are desired end-effector positions; a tap registers when the
// end-effector lands within kTapRadius of the current target in sequence.
class SideTapEnv {
 public:
  struct Init {
    double q1 = 0.0, q2 = 0.0;
  };
  static const std::vector<Vec2>& targets();
  static Init sample_init(Rng& rng);  // end-effector uniform in a reachable box

  void reset(const Init& init);
  void step(const Vec2& action);
  std::vector<double> observe() const;  // (q1, q2, taps/4)
  Vec2 ee() const;

  int taps() const { return taps_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  long clamped() const { return clamped_; }
  void set_max_steps(int n) { max_steps_ = n; }
  int max_steps() const { return max_steps_; }

 private:
  double q1_ = 0.0, q2_ = 0.0;
  int taps_ = 0;
  int steps_ = 0;
  bool done_ = false;
  long clamped_ = 0;
  int max_steps_ = kSideTapMaxSteps;
};

// score = 0.25 * taps - 0.01 * max(0, steps - ideal_steps), floored at -0.2.
double side_tapping_score(int taps, int steps, int ideal_steps);

enum class ShapeKind { rect, arc };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::rect;
  Vec2 center{0.0, 0.0};
  Vec2 half{0.3, 0.3};                   // rect half-extents
  double radius = 0.4, a0 = 0.0, a1 = 3.14;  // arc, counterclockwise a0 -> a1

  // Scoring polyline: rect = closed corner loop; arc = inscribed chords of
  // roughly kExpertSpeed length, endpoints exact. This polyline IS the target
  // stroke; experts traverse its vertices.
  std::vector<Vec2> outline() const;
  std::vector<double> params() const;  // 5 values, zero-padded
  Raster raster() const;

  static ShapeSpec sample_rect(Rng& rng);
  static ShapeSpec sample_arc(Rng& rng);
};

// Free agent drawing on the workspace; actions are next positions, clamped to
// the workspace box. The visited path grows by one point per step.
class DrawEnv {
 public:
  struct Init {
    ShapeSpec shape;
    int start_vertex = 0;  // rect: corner 0..3; arc: 0 = a0 end, 1 = a1 end
  };
  static Init sample_init(ShapeKind kind, Rng& rng);

  void reset(const Init& init);
  void step(const Vec2& action);
  std::vector<double> observe() const;  // (p, shape params)

  const ShapeSpec& shape() const { return shape_; }
  int start_vertex() const { return start_vertex_; }
  const Vec2& pos() const { return pos_; }
  const std::vector<Vec2>& path() const { return path_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  long clamped() const { return clamped_; }
  void set_max_steps(int n) { max_steps_ = n; }
  int max_steps() const { return max_steps_; }

 private:
  ShapeSpec shape_;
  int start_vertex_ = 0;
  Vec2 pos_{0.0, 0.0};
  std::vector<Vec2> path_;
  int steps_ = 0;
  bool done_ = false;
  long clamped_ = 0;
  int max_steps_ = kDrawMaxSteps;
};

// Piecewise-linear constant-speed waypoint schedule with integer per-leg
// durations; dwell legs pin waypoint samples under any subsampling offset.
class ExpertPath {
 public:
  void move_to(const Vec2& p);   // appends a leg of duration ceil(len/speed)
  void edge_to(const Vec2& p);   // appends a leg of duration exactly 1
  void dwell(int units);
  void start_at(const Vec2& p);

  int duration() const { return total_; }
  Vec2 pos(double t) const;  // clamped to [0, duration]

 private:
  struct Leg {
    Vec2 from, to;
    int dur;
  };
  std::vector<Leg> legs_;
  Vec2 cur_{0.0, 0.0};
  int total_ = 0;
  bool started_ = false;
};

ExpertPath expert_side_tap_path(const Vec2& start_ee);
ExpertPath expert_draw_path(const ShapeSpec& shape, int start_vertex);

// Closed-loop expert demonstration at the given rate: obs[k] is the state
// after k expert actions, act[k] the position targeted by step k+1.
Trajectory expert_demo_side_tap(const SideTapEnv::Init& init, double rate);
Trajectory expert_demo_draw(const DrawEnv::Init& init, double rate);

// Steps the expert needs to finish at the given rate (side tapping: steps to
// the fourth tap; drawing: steps to the end of the outline traversal).
int expert_steps_side_tap(const SideTapEnv::Init& init, double rate);
int expert_steps_draw(const DrawEnv::Init& init, double rate);

// Task registry: "side_tap", "draw_rect", "draw_arc".
struct TaskInfo {
  std::string name;
  int d_obs = 0;
  int d_act = 2;
  int max_steps = 0;
};
const TaskInfo& task_info(const std::string& task);

}  // namespace dispo
