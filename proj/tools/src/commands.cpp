#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "dispo/checkpoint.hpp"
#include "dispo/dataset.hpp"
#include "dispo/envs.hpp"
#include "dispo/ops.hpp"
#include "dispo/rollout.hpp"
#include "dispo/sampler.hpp"
#include "dispo/trainer.hpp"

namespace dispo {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string fine_path_for(const std::string& coarse) {
  size_t dot = coarse.rfind('.');
  size_t slash = coarse.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return coarse + "_fine";
  }
  return coarse.substr(0, dot) + "_fine" + coarse.substr(dot);
}

uint64_t episode_seed(uint64_t base, int i) {
  return mix_u64(base + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(i + 1));
}

struct MetricStats {
  double mean = 0, sd = 0, lo = 0, hi = 0;
};

MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  double sum = 0, sum2 = 0;
  s.lo = xs[0];
  s.hi = xs[0];
  for (double x : xs) {
    sum += x;
    sum2 += x * x;
    s.lo = std::min(s.lo, x);
    s.hi = std::max(s.hi, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  s.sd = std::sqrt(std::max(0.0, sum2 / static_cast<double>(xs.size()) - s.mean * s.mean));
  return s;
}

void write_episode_jsonl(std::ofstream& out, const std::string& ablation,
                         const EpisodeResult& e) {
  out << "{\"seed\":" << e.seed << ",\"scale\":" << fmt_num(e.scale) << ",\"ablation\":\""
      << ablation << "\",\"score\":" << fmt_num(e.score) << ",\"taps\":" << e.taps
      << ",\"iou_last\":" << fmt_num(e.iou_last) << ",\"iou_max\":" << fmt_num(e.iou_max)
      << ",\"steps\":" << e.steps << ",\"ideal_steps\":" << e.ideal_steps
      << ",\"clamped\":" << e.clamped << ",\"positions\":[";
  for (size_t i = 0; i < e.positions.size(); ++i) {
    if (i) out << ',';
    out << '[' << fmt_num(e.positions[i][0]) << ',' << fmt_num(e.positions[i][1]) << ']';
  }
  out << "]}\n";
}

Checkpoint make_live_checkpoint(const DiSPoModel& model, const Normalizer& norm,
                                double native_rate) {
  Checkpoint ck;
  ck.model = model;  // tensors are shared handles; evaluation only reads them
  ck.norm = norm;
  ck.native_rate = native_rate;
  return ck;
}

}  // namespace

int cmd_gen_demos(const GenDemosArgs& args) {
  try {
    const TaskInfo& info = task_info(args.task);
    (void)info;
    if (args.n < 1 || args.stride < 1 || !(args.rate > 0.0)) {
      throw std::invalid_argument("gen-demos: n, stride, rate must be positive");
    }
    std::vector<Trajectory> fine, coarse;
    Rng base(args.seed);
    for (int i = 0; i < args.n; ++i) {
      Rng rng = base.derive(static_cast<uint64_t>(i) + 1);
      Trajectory f;
      if (args.task == "side_tap") {
        f = expert_demo_side_tap(SideTapEnv::sample_init(rng), args.rate);
      } else {
        ShapeKind kind = args.task == "draw_rect" ? ShapeKind::rect : ShapeKind::arc;
        f = expert_demo_draw(DrawEnv::sample_init(kind, rng), args.rate);
      }
      coarse.push_back(coarsify_demo(f, args.stride, rng));
      fine.push_back(std::move(f));
    }
    save_trajectories(args.out, coarse);
    save_trajectories(fine_path_for(args.out), fine);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "gen-demos: " << e.what() << "\n";
    return 2;
  }
}

int cmd_train(const RunConfig& rc_in, const std::string& data_path,
              const std::string& out_dir) {
  RunConfig rc = rc_in;
  std::ofstream metrics;
  try {
    rc.resolve();
    std::filesystem::create_directories(out_dir);
    echo_run_config(rc, out_dir);

    Dataset ds = Dataset::build(load_trajectories(data_path));
    for (const Trajectory& t : ds.trajs) {
      if (t.task != rc.task) throw std::invalid_argument("train: dataset task mismatch");
    }
    Rng base(rc.seed);
    Rng init_rng = base.derive(1);
    Rng train_rng = base.derive(2);
    DiSPoModel model = DiSPoModel::init(rc.model, init_rng);
    AdamW opt(model.parameters(), rc.optim);
    TrainConfig tc{rc.batch_size, rc.steps_per_epoch};
    AugmentConfig aug{rc.rate_divisors};

    metrics.open(out_dir + "/metrics.csv");
    if (!metrics) throw std::invalid_argument("train: cannot write metrics.csv");
    metrics << "epoch,l_mse,l_rnc,eval_score\n" << std::flush;

    double best_score = 0.0;
    int best_epoch = -1;
    RolloutOptions eval_opt;  // native scale, no ablation
    for (int epoch = 1; epoch <= rc.epochs; ++epoch) {
      EpochMetrics em;
      try {
        em = train_epoch(ds, model, opt, tc, aug, train_rng);
      } catch (const NumericError& e) {
        std::cerr << "train: " << e.what() << "\n";
        return 3;
      }
      bool eval_now = rc.eval_episodes > 0 &&
                      (epoch % rc.eval_cadence == 0 || epoch == rc.epochs);
      std::string score_field;
      if (eval_now) {
        Checkpoint live = make_live_checkpoint(model, ds.norm, ds.native_rate);
        std::vector<EpisodeResult> eps;
        for (int i = 0; i < rc.eval_episodes; ++i) {
          eps.push_back(run_episode(rc.task, live, eval_opt,
                                    episode_seed(mix_u64(rc.seed + 77) + epoch, i)));
        }
        EvalSummary s = summarize(rc.task, eps);
        score_field = fmt_num(s.selection_score);
        std::string dir = out_dir + "/ckpt_epoch_" + std::to_string(epoch);
        save_checkpoint(dir, model, ds.norm, ds.native_rate);
        if (best_epoch < 0 || s.selection_score > best_score) {
          best_score = s.selection_score;
          best_epoch = epoch;
        }
      }
      metrics << epoch << ',' << fmt_num(em.l_mse) << ',' << fmt_num(em.l_rnc) << ','
              << score_field << "\n"
              << std::flush;
    }
    if (best_epoch > 0) {
      std::ofstream best(out_dir + "/best.json");
      best << "{\"epoch\":" << best_epoch << ",\"score\":" << fmt_num(best_score)
           << ",\"dir\":\"ckpt_epoch_" << best_epoch << "\"}\n";
      std::error_code ec;
      std::filesystem::remove(out_dir + "/best", ec);
      std::filesystem::create_directory_symlink("ckpt_epoch_" + std::to_string(best_epoch),
                                                out_dir + "/best", ec);
    }
    return 0;
  } catch (const NumericError& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "train: " << e.what() << "\n";
    return 2;
  }
}

int cmd_eval(const RunConfig& rc_in, const std::string& ckpt_dir, const std::string& out_dir) {
  RunConfig rc = rc_in;
  try {
    rc.resolve();
    std::filesystem::create_directories(out_dir);
    echo_run_config(rc, out_dir);
    Checkpoint ck = load_checkpoint(ckpt_dir);

    bool interp = rollout_mode_from_string(rc.ablation) == RolloutMode::interp;
    std::vector<double> scales = interp ? std::vector<double>{1.0} : rc.eval_scales;

    std::ofstream jsonl(out_dir + "/episodes.jsonl");
    std::ofstream csv(out_dir + "/summary.csv");
    if (!jsonl || !csv) throw std::invalid_argument("eval: cannot write outputs");
    csv << "scale,episodes";
    for (const char* m : {"score", "iou_last", "iou_max", "taps"}) {
      csv << ',' << m << "_mean," << m << "_std," << m << "_min," << m << "_max";
    }
    csv << "\n";

    for (double scale : scales) {
      RolloutOptions opt;
      opt.r_act.factor = scale;
      opt.obs_mode = obs_mode_from_string(rc.obs_mode);
      opt.mode = interp ? RolloutMode::interp : RolloutMode::dispo;
      std::vector<EpisodeResult> eps;
      for (int i = 0; i < rc.episodes; ++i) {
        eps.push_back(run_episode(rc.task, ck, opt, episode_seed(rc.seed, i)));
        write_episode_jsonl(jsonl, rc.ablation, eps.back());
      }
      std::vector<double> score, il, im, taps;
      for (const EpisodeResult& e : eps) {
        score.push_back(e.score);
        il.push_back(e.iou_last);
        im.push_back(e.iou_max);
        taps.push_back(e.taps);
      }
      csv << fmt_num(eps.empty() ? scale : eps[0].scale) << ',' << eps.size();
      for (const auto& xs : {score, il, im, taps}) {
        MetricStats s = stats_of(xs);
        csv << ',' << fmt_num(s.mean) << ',' << fmt_num(s.sd) << ',' << fmt_num(s.lo) << ','
            << fmt_num(s.hi);
      }
      csv << "\n";
    }
    return 0;
  } catch (const NumericError& e) {
    std::cerr << "eval: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "eval: " << e.what() << "\n";
    return 2;
  }
}

int cmd_dump_features(const DumpFeaturesArgs& args) {
  try {
    Checkpoint ck = load_checkpoint(args.ckpt);
    const DiSPoConfig& cfg = ck.model.cfg;
    if (args.k < 1 || args.k > cfg.diffusion_steps) {
      throw std::invalid_argument("dump-features: k outside 1.." +
                                  std::to_string(cfg.diffusion_steps));
    }
    Dataset ds = Dataset::build(load_trajectories(args.data));
    ds.norm = ck.norm;  // frozen training-time bounds

    std::ofstream out(args.out);
    if (!out) throw std::invalid_argument("dump-features: cannot write " + args.out);

    StepScaleSequence r = StepScaleSequence::ones(cfg.t_obs, cfg.t_act);
    AugmentConfig no_aug{{}};
    Rng base(args.seed);
    long idx = 0;
    for (size_t t = 0; t < ds.trajs.size(); ++t) {
      int count = ds.window_count(static_cast<int>(t), cfg.t_obs, cfg.t_act);
      for (int i0 = 1; i0 <= count; ++i0, ++idx) {
        WindowGroup g =
            make_window_group(ds, static_cast<int>(t), i0, cfg, no_aug, nullptr);
        const AugmentedWindow& w = g.variants.at(0);
        Rng rng = base.derive(static_cast<uint64_t>(idx) + 1);
        NoisedPair pair = ddpm_training_pair(w.act, args.k, ck.model.schedule, rng);
        ForwardResult fw = forward_noise_pred(w.obs, pair.a_k, r, args.k, ck.model);
        Tensor pooled = ops::mean_rows(
            ops::slice_rows(fw.mid_feature, 1 + cfg.t_obs, cfg.seq_len()));
        // Ground-truth executed action (denormalized) for coloring.
        int exec = cfg.executed_index();
        std::vector<double> act_row(static_cast<size_t>(cfg.d_act));
        for (int j = 0; j < cfg.d_act; ++j) act_row[static_cast<size_t>(j)] = w.act.at(exec - 1, j);
        act_row = ds.norm.denormalize_act(act_row);
        for (int d = 0; d < cfg.d_model; ++d) {
          if (d) out << ',';
          out << fmt_num(pooled.at(d));
        }
        for (int j = 0; j < cfg.d_act; ++j) out << ',' << fmt_num(act_row[static_cast<size_t>(j)]);
        out << "\n";
      }
    }
    return 0;
  } catch (const NumericError& e) {
    std::cerr << "dump-features: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "dump-features: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dispo
