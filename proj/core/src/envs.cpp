#include "dispo/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dispo {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist(const Vec2& a, const Vec2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

Vec2 clamp_workspace(const Vec2& p, bool* clamped) {
  Vec2 q{std::clamp(p[0], -1.0, 1.0), std::clamp(p[1], -1.0, 1.0)};
  *clamped = q[0] != p[0] || q[1] != p[1];
  return q;
}

}  // namespace

const std::vector<Vec2>& SideTapEnv::targets() {
  static const std::vector<Vec2> t{{-0.6, 0.3}, {0.6, 0.3}, {-0.6, 0.3}, {0.6, 0.3}};
  return t;
}

SideTapEnv::Init SideTapEnv::sample_init(Rng& rng) {
  double x = rng.uniform(-0.4, 0.4);
  double y = rng.uniform(0.2, 0.8);
  IkResult ik = two_link_ik({x, y}, kLink1, kLink2);
  return {ik.q1, ik.q2};
}

void SideTapEnv::reset(const Init& init) {
  q1_ = init.q1;
  q2_ = init.q2;
  taps_ = 0;
  steps_ = 0;
  done_ = false;
  clamped_ = 0;
  max_steps_ = kSideTapMaxSteps;
}

Vec2 SideTapEnv::ee() const { return two_link_fk(q1_, q2_, kLink1, kLink2); }

void SideTapEnv::step(const Vec2& action) {
  IkResult ik = two_link_ik(action, kLink1, kLink2);
  q1_ = ik.q1;
  q2_ = ik.q2;
  clamped_ += ik.clamped;
  ++steps_;
  if (taps_ < 4 && dist(ee(), targets()[static_cast<size_t>(taps_)]) <= kTapRadius)
    ++taps_;
  done_ = taps_ >= 4 || steps_ >= max_steps_;
}

std::vector<double> SideTapEnv::observe() const { return {q1_, q2_, taps_ / 4.0}; }

double side_tapping_score(int taps, int steps, int ideal_steps) {
  double s = 0.25 * taps - 0.01 * std::max(0, steps - ideal_steps);
  return std::clamp(s, -0.2, 1.0);
}

std::vector<Vec2> ShapeSpec::outline() const {
  if (kind == ShapeKind::rect) {
    Vec2 c0{center[0] - half[0], center[1] - half[1]};
    Vec2 c1{center[0] + half[0], center[1] - half[1]};
    Vec2 c2{center[0] + half[0], center[1] + half[1]};
    Vec2 c3{center[0] - half[0], center[1] + half[1]};
    return {c0, c1, c2, c3, c0};
  }
  double span = a1 - a0;
  int n = std::max(1, static_cast<int>(std::ceil(span * radius / kExpertSpeed)));
  std::vector<Vec2> pts;
  pts.reserve(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    double a = a0 + span * k / n;
    pts.push_back({center[0] + radius * std::cos(a), center[1] + radius * std::sin(a)});
  }
  return pts;
}

std::vector<double> ShapeSpec::params() const {
  if (kind == ShapeKind::rect) return {center[0], center[1], half[0], half[1], 0.0};
  return {center[0], center[1], radius, a0, a1};
}

Raster ShapeSpec::raster() const {
  Raster r;
  r.mark_polyline(outline());
  return r;
}

ShapeSpec ShapeSpec::sample_rect(Rng& rng) {
  ShapeSpec s;
  s.kind = ShapeKind::rect;
  s.center = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
  s.half = {rng.uniform(0.25, 0.45), rng.uniform(0.25, 0.45)};
  return s;
}

ShapeSpec ShapeSpec::sample_arc(Rng& rng) {
  ShapeSpec s;
  s.kind = ShapeKind::arc;
  s.center = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
  s.radius = rng.uniform(0.3, 0.5);
  s.a0 = rng.uniform(0.0, 2.0 * kPi);
  double span = rng.uniform(2.0 * kPi / 3.0, 1.5 * kPi);
  s.a1 = s.a0 + span;
  return s;
}

DrawEnv::Init DrawEnv::sample_init(ShapeKind kind, Rng& rng) {
  Init init;
  if (kind == ShapeKind::rect) {
    init.shape = ShapeSpec::sample_rect(rng);
    init.start_vertex = rng.uniform_int(0, 3);
  } else {
    init.shape = ShapeSpec::sample_arc(rng);
    init.start_vertex = rng.uniform_int(0, 1);
  }
  return init;
}

void DrawEnv::reset(const Init& init) {
  shape_ = init.shape;
  start_vertex_ = init.start_vertex;
  std::vector<Vec2> out = shape_.outline();
  if (shape_.kind == ShapeKind::rect) {
    pos_ = out[static_cast<size_t>(start_vertex_ % 4)];
  } else {
    pos_ = start_vertex_ == 0 ? out.front() : out.back();
  }
  path_.assign(1, pos_);
  steps_ = 0;
  done_ = false;
  clamped_ = 0;
  max_steps_ = kDrawMaxSteps;
}

void DrawEnv::step(const Vec2& action) {
  bool clamped = false;
  pos_ = clamp_workspace(action, &clamped);
  clamped_ += clamped;
  path_.push_back(pos_);
  ++steps_;
  done_ = steps_ >= max_steps_;
}

std::vector<double> DrawEnv::observe() const {
  std::vector<double> o{pos_[0], pos_[1]};
  for (double v : shape_.params()) o.push_back(v);
  return o;
}

void ExpertPath::start_at(const Vec2& p) {
  cur_ = p;
  started_ = true;
}

void ExpertPath::move_to(const Vec2& p) {
  if (!started_) throw std::logic_error("expert path: start_at first");
  int dur = std::max(1, static_cast<int>(std::ceil(dist(cur_, p) / kExpertSpeed)));
  legs_.push_back({cur_, p, dur});
  total_ += dur;
  cur_ = p;
}

void ExpertPath::edge_to(const Vec2& p) {
  if (!started_) throw std::logic_error("expert path: start_at first");
  legs_.push_back({cur_, p, 1});
  total_ += 1;
  cur_ = p;
}

void ExpertPath::dwell(int units) {
  if (!started_) throw std::logic_error("expert path: start_at first");
  legs_.push_back({cur_, cur_, units});
  total_ += units;
}

Vec2 ExpertPath::pos(double t) const {
  if (legs_.empty()) return cur_;
  t = std::clamp(t, 0.0, static_cast<double>(total_));
  double base = 0.0;
  for (const Leg& leg : legs_) {
    if (t <= base + leg.dur) {
      double f = (t - base) / leg.dur;
      return {leg.from[0] + f * (leg.to[0] - leg.from[0]),
              leg.from[1] + f * (leg.to[1] - leg.from[1])};
    }
    base += leg.dur;
  }
  return legs_.back().to;
}

ExpertPath expert_side_tap_path(const Vec2& start_ee) {
  ExpertPath p;
  p.start_at(start_ee);
  for (const Vec2& t : SideTapEnv::targets()) {
    p.move_to(t);
    p.dwell(kDwellUnits);
  }
  return p;
}

ExpertPath expert_draw_path(const ShapeSpec& shape, int start_vertex) {
  ExpertPath p;
  std::vector<Vec2> out = shape.outline();
  if (shape.kind == ShapeKind::rect) {
    // Corner loop from the start corner, counterclockwise, pausing at every
    // corner so subsampled demos keep a sample pinned there.
    int s = start_vertex % 4;
    p.start_at(out[static_cast<size_t>(s)]);
    p.dwell(kDwellUnits);
    for (int i = 1; i <= 4; ++i) {
      p.move_to(out[static_cast<size_t>((s + i) % 4)]);
      p.dwell(kDwellUnits);
    }
  } else {
    if (start_vertex == 1) std::reverse(out.begin(), out.end());
    p.start_at(out[0]);
    p.dwell(kDwellUnits);
    for (size_t i = 1; i < out.size(); ++i) p.edge_to(out[i]);
    p.dwell(kDwellUnits);
  }
  return p;
}

namespace {

template <class Env>
Trajectory record_demo(Env& env, const ExpertPath& path, const std::string& task,
                       double rate) {
  Trajectory tr;
  tr.task = task;
  tr.rate = rate;
  // Fencepost length duration*rate + 1 so the final arrival is observed; the
  // trailing action holds at the path end (the expert dwells there).
  int n_samp = static_cast<int>(std::floor(path.duration() * rate + 1e-9)) + 1;
  for (int k = 1; k <= n_samp; ++k) {
    tr.obs.push_back(env.observe());
    Vec2 a = path.pos(k / rate);
    env.step(a);
    tr.act.push_back({a[0], a[1]});
  }
  return tr;
}

}  // namespace

Trajectory expert_demo_side_tap(const SideTapEnv::Init& init, double rate) {
  SideTapEnv env;
  env.reset(init);
  ExpertPath path = expert_side_tap_path(env.ee());
  return record_demo(env, path, "side_tap", rate);
}

Trajectory expert_demo_draw(const DrawEnv::Init& init, double rate) {
  DrawEnv env;
  env.reset(init);
  env.set_max_steps(1 << 20);  // record the full traversal; 80 caps evaluation only
  ExpertPath path = expert_draw_path(env.shape(), env.start_vertex());
  std::string task = init.shape.kind == ShapeKind::rect ? "draw_rect" : "draw_arc";
  return record_demo(env, path, task, rate);
}

int expert_steps_side_tap(const SideTapEnv::Init& init, double rate) {
  SideTapEnv env;
  env.reset(init);
  env.set_max_steps(1 << 20);
  ExpertPath path = expert_side_tap_path(env.ee());
  int n_act = static_cast<int>(std::floor(path.duration() * rate + 1e-9));
  for (int k = 1; k <= n_act; ++k) {
    env.step(path.pos(k / rate));
    if (env.taps() >= 4) return env.steps();
  }
  return env.steps();
}

int expert_steps_draw(const DrawEnv::Init& init, double rate) {
  ExpertPath path = expert_draw_path(init.shape, init.start_vertex);
  return static_cast<int>(std::floor(path.duration() * rate + 1e-9));
}

const TaskInfo& task_info(const std::string& task) {
  static const TaskInfo side{"side_tap", 3, 2, kSideTapMaxSteps};
  static const TaskInfo rect{"draw_rect", 7, 2, kDrawMaxSteps};
  static const TaskInfo arc{"draw_arc", 7, 2, kDrawMaxSteps};
  if (task == "side_tap") return side;
  if (task == "draw_rect") return rect;
  if (task == "draw_arc") return arc;
  throw std::invalid_argument("unknown task: " + task);
}

}  // namespace dispo
