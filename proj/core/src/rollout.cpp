#include "dispo/rollout.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace dispo {

ObsMode obs_mode_from_string(const std::string& s) {
  if (s == "native") return ObsMode::native;
  if (s == "every") return ObsMode::every;
  throw std::invalid_argument("obs mode must be native or every");
}

RolloutMode rollout_mode_from_string(const std::string& s) {
  if (s == "none") return RolloutMode::dispo;
  if (s == "interp") return RolloutMode::interp;
  throw std::invalid_argument("ablation must be none or interp");
}

namespace {

Vec2 midpoint(const Vec2& a, const Vec2& b) {
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
}

Vec2 row_to_vec(const std::vector<double>& row) { return {row[0], row[1]}; }

// Closed-loop policy execution shared by both tasks. PosFn reads the agent
// position used for logging and for the interp ablation's leading midpoint.
template <class Env, class PosFn>
void policy_loop(Env& env, PosFn pos_of, const Checkpoint& ck, const RolloutOptions& opt,
                 Rng& pol_rng, EpisodeResult* res) {
  const DiSPoConfig& cfg = ck.model.cfg;
  int exec = cfg.executed_index();
  if (exec < 1 || exec > cfg.t_act) {
    throw std::invalid_argument("rollout: executed index outside the action window");
  }
  std::vector<std::vector<double>> history{env.observe()};

  if (opt.mode == RolloutMode::dispo) {
    std::vector<double> factors = opt.r_act.action_factors(cfg.t_obs, cfg.t_act);
    double r_exec = factors[static_cast<size_t>(exec - 1)];
    res->scale = r_exec;
    int period =
        opt.obs_mode == ObsMode::native ? std::max(1, static_cast<int>(std::lround(1.0 / r_exec)))
                                        : 1;
    if (exec - 1 + period > cfg.t_act) {
      throw std::invalid_argument(
          "rollout: action horizon too short to cover one native period at this scale");
    }
    while (!env.done()) {
      auto window = sample_action_window(history, opt.r_act, ck.model, ck.norm, pol_rng);
      for (int j = 0; j < period && !env.done(); ++j) {
        env.step(row_to_vec(window[static_cast<size_t>(exec - 1 + j)]));
        res->positions.push_back(pos_of());
      }
      history.push_back(env.observe());
    }
    return;
  }

  // Interp ablation: native-scale inference, midpoint-doubled future slots,
  // first half executed open-loop; observations refresh at the native cadence
  // (every second executed step on the fine grid).
  res->scale = 0.5;
  RactSpec unit;
  int m = cfg.t_act - exec + 1;
  long executed = 0;
  while (!env.done()) {
    auto window = sample_action_window(history, unit, ck.model, ck.norm, pol_rng);
    std::vector<Vec2> fine;
    Vec2 prev = pos_of();
    for (int i = 0; i < m; ++i) {
      Vec2 wi = row_to_vec(window[static_cast<size_t>(exec - 1 + i)]);
      fine.push_back(midpoint(prev, wi));
      fine.push_back(wi);
      prev = wi;
    }
    for (int i = 0; i < m && !env.done(); ++i) {
      env.step(fine[static_cast<size_t>(i)]);
      res->positions.push_back(pos_of());
      ++executed;
      if (executed % 2 == 0) history.push_back(env.observe());
    }
  }
}

}  // namespace

EpisodeResult run_episode(const std::string& task, const Checkpoint& ck,
                          const RolloutOptions& opt, uint64_t seed) {
  const TaskInfo& info = task_info(task);
  const DiSPoConfig& cfg = ck.model.cfg;
  if (cfg.d_obs != info.d_obs || cfg.d_act != info.d_act) {
    throw std::invalid_argument("rollout: checkpoint dimensions do not match task " + task);
  }
  Rng base(seed);
  Rng env_rng = base.derive(1);
  Rng pol_rng = base.derive(2);
  int max_steps = opt.max_steps > 0 ? opt.max_steps : info.max_steps;

  EpisodeResult res;
  res.seed = seed;

  if (task == "side_tap") {
    SideTapEnv env;
    SideTapEnv::Init init = SideTapEnv::sample_init(env_rng);
    env.reset(init);
    env.set_max_steps(max_steps);
    policy_loop(env, [&env] { return env.ee(); }, ck, opt, pol_rng, &res);
    res.steps = env.steps();
    res.taps = env.taps();
    res.clamped = env.clamped();
    int native_steps = expert_steps_side_tap(init, ck.native_rate);
    res.ideal_steps = static_cast<int>(std::lround(native_steps / res.scale));
    res.score = side_tapping_score(res.taps, res.steps, res.ideal_steps);
    assert(res.score >= -0.2 && res.score <= 1.0);
  } else {
    ShapeKind kind = task == "draw_rect" ? ShapeKind::rect : ShapeKind::arc;
    DrawEnv env;
    DrawEnv::Init init = DrawEnv::sample_init(kind, env_rng);
    env.reset(init);
    env.set_max_steps(max_steps);
    policy_loop(env, [&env] { return env.pos(); }, ck, opt, pol_rng, &res);
    res.steps = env.steps();
    res.clamped = env.clamped();
    auto [last, mx] = iou_score(env.path(), init.shape.raster());
    res.iou_last = last;
    res.iou_max = mx;
    res.score = last;
    int native_steps = expert_steps_draw(init, ck.native_rate);
    res.ideal_steps = static_cast<int>(std::lround(native_steps / res.scale));
    assert(res.score >= 0.0 && res.score <= 1.0 && res.iou_max >= res.iou_last);
  }
  return res;
}

EvalSummary summarize(const std::string& task, const std::vector<EpisodeResult>& eps) {
  EvalSummary s;
  s.episodes = static_cast<int>(eps.size());
  if (eps.empty()) return s;
  double sum = 0.0, sum2 = 0.0;
  s.min_score = eps[0].score;
  s.max_score = eps[0].score;
  for (const EpisodeResult& e : eps) {
    sum += e.score;
    sum2 += e.score * e.score;
    s.min_score = std::min(s.min_score, e.score);
    s.max_score = std::max(s.max_score, e.score);
    s.mean_iou_last += e.iou_last;
    s.mean_iou_max += e.iou_max;
    s.mean_taps += e.taps;
  }
  int n = s.episodes;
  s.mean_score = sum / n;
  double var = sum2 / n - s.mean_score * s.mean_score;
  s.std_score = std::sqrt(std::max(0.0, var));
  s.mean_iou_last /= n;
  s.mean_iou_max /= n;
  s.mean_taps /= n;
  s.selection_score = task == "side_tap" ? s.mean_score : s.mean_iou_max;
  return s;
}

}  // namespace dispo
