#include "dispo/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dispo {

namespace {

// Fixed 17-significant-digit decimal round-trips doubles exactly and keeps
// files byte-stable across writers.
std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_matrix(std::string& out, const std::vector<std::vector<double>>& m) {
  out += '[';
  for (size_t i = 0; i < m.size(); ++i) {
    if (i) out += ',';
    out += '[';
    for (size_t j = 0; j < m[i].size(); ++j) {
      if (j) out += ',';
      out += fmt_num(m[i][j]);
    }
    out += ']';
  }
  out += ']';
}

}  // namespace

void Trajectory::validate() const {
  if (obs.size() != act.size()) {
    throw std::invalid_argument("trajectory: obs length " + std::to_string(obs.size()) +
                                " != act length " + std::to_string(act.size()));
  }
  if (obs.empty()) throw std::invalid_argument("trajectory: empty");
  if (!(rate > 0.0)) throw std::invalid_argument("trajectory: rate must be positive");
  size_t d_obs = obs[0].size();
  size_t d_act = act[0].size();
  for (const auto& row : obs) {
    if (row.size() != d_obs) throw std::invalid_argument("trajectory: ragged obs rows");
  }
  for (const auto& row : act) {
    if (row.size() != d_act) throw std::invalid_argument("trajectory: ragged act rows");
  }
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Trajectory> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Trajectory t;
    t.task = j.at("task").get<std::string>();
    t.rate = j.at("rate").get<double>();
    t.obs = j.at("obs").get<std::vector<std::vector<double>>>();
    t.act = j.at("act").get<std::vector<std::vector<double>>>();
    t.validate();
    out.push_back(std::move(t));
  }
  return out;
}

void save_trajectories(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const Trajectory& t : trajs) {
    std::string line = "{\"task\":\"" + t.task + "\",\"rate\":" + fmt_num(t.rate);
    line += ",\"obs\":";
    append_matrix(line, t.obs);
    line += ",\"act\":";
    append_matrix(line, t.act);
    line += "}\n";
    out << line;
  }
}

Normalizer Normalizer::fit(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw std::invalid_argument("normalizer: empty dataset");
  size_t d_obs = trajs[0].obs[0].size();
  size_t d_act = trajs[0].act[0].size();
  Normalizer n;
  n.obs_min.assign(d_obs, 1e300);
  n.obs_max.assign(d_obs, -1e300);
  n.act_min.assign(d_act, 1e300);
  n.act_max.assign(d_act, -1e300);
  for (const Trajectory& t : trajs) {
    for (const auto& row : t.obs) {
      for (size_t i = 0; i < d_obs; ++i) {
        n.obs_min[i] = std::min(n.obs_min[i], row[i]);
        n.obs_max[i] = std::max(n.obs_max[i], row[i]);
      }
    }
    for (const auto& row : t.act) {
      for (size_t i = 0; i < d_act; ++i) {
        n.act_min[i] = std::min(n.act_min[i], row[i]);
        n.act_max[i] = std::max(n.act_max[i], row[i]);
      }
    }
  }
  for (size_t i = 0; i < d_obs; ++i) {
    if (n.obs_min[i] == n.obs_max[i]) ++n.degenerate_dims;
  }
  for (size_t i = 0; i < d_act; ++i) {
    if (n.act_min[i] == n.act_max[i]) ++n.degenerate_dims;
  }
  return n;
}

namespace {

// Maps [lo, hi] onto [a, b]; degenerate dims pin to the midpoint. Inputs
// clamp to the fitted range first.
double norm_one(double x, double lo, double hi, double a, double b, long* clamped) {
  if (lo == hi) return 0.5 * (a + b);
  if (x < lo) {
    x = lo;
    ++*clamped;
  } else if (x > hi) {
    x = hi;
    ++*clamped;
  }
  return a + (x - lo) / (hi - lo) * (b - a);
}

double denorm_one(double y, double lo, double hi, double a, double b) {
  if (lo == hi) return lo;
  return lo + (y - a) / (b - a) * (hi - lo);
}

}  // namespace

std::vector<double> Normalizer::normalize_obs(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = norm_one(x[i], obs_min[i], obs_max[i], -1.0, 0.0, &clamped);
  }
  return out;
}

std::vector<double> Normalizer::normalize_act(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = norm_one(x[i], act_min[i], act_max[i], -1.0, 1.0, &clamped);
  }
  return out;
}

std::vector<double> Normalizer::denormalize_act(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = denorm_one(x[i], act_min[i], act_max[i], -1.0, 1.0);
  }
  return out;
}

std::vector<double> Normalizer::denormalize_obs(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = denorm_one(x[i], obs_min[i], obs_max[i], -1.0, 0.0);
  }
  return out;
}

Trajectory resample_trajectory(const Trajectory& src, double w_new) {
  src.validate();
  if (!(w_new > 0.0)) throw std::invalid_argument("resample: rate must be positive");
  if (w_new > src.rate * (1.0 + 1e-12)) {
    throw std::invalid_argument("resample: target rate exceeds source rate");
  }
  int t = src.length();
  double ratio = src.rate / w_new;  // >= 1 source steps per target step
  int new_len = static_cast<int>(std::floor((t - 1) / ratio + 1e-12)) + 1;
  Trajectory out;
  out.task = src.task;
  out.rate = w_new;
  out.obs.reserve(static_cast<size_t>(new_len));
  out.act.reserve(static_cast<size_t>(new_len));
  auto lerp_row = [](const std::vector<double>& a, const std::vector<double>& b,
                     double f) {
    std::vector<double> r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + f * (b[i] - a[i]);
    return r;
  };
  for (int i = 0; i < new_len; ++i) {
    double pos = i * ratio;
    int i0 = static_cast<int>(std::floor(pos));
    double frac = pos - i0;
    if (i0 >= t - 1) {
      i0 = t - 1;
      frac = 0.0;
    }
    if (frac < 1e-12) {
      out.obs.push_back(src.obs[static_cast<size_t>(i0)]);
      out.act.push_back(src.act[static_cast<size_t>(i0)]);
    } else {
      out.obs.push_back(lerp_row(src.obs[static_cast<size_t>(i0)],
                                 src.obs[static_cast<size_t>(i0) + 1], frac));
      out.act.push_back(lerp_row(src.act[static_cast<size_t>(i0)],
                                 src.act[static_cast<size_t>(i0) + 1], frac));
    }
  }
  return out;
}

Trajectory coarsify_demo_offset(const Trajectory& fine, int stride, int offset) {
  fine.validate();
  if (stride < 1) throw std::invalid_argument("coarsify: stride must be >= 1");
  if (offset < 0 || offset >= stride) throw std::invalid_argument("coarsify: bad offset");
  if (fine.length() <= stride) throw std::invalid_argument("coarsify: trajectory too short");
  Trajectory out;
  out.task = fine.task;
  out.rate = fine.rate / stride;
  for (int i = offset; i < fine.length(); i += stride) {
    out.obs.push_back(fine.obs[static_cast<size_t>(i)]);
    out.act.push_back(fine.act[static_cast<size_t>(i)]);
  }
  return out;
}

Trajectory coarsify_demo(const Trajectory& fine, int stride, Rng& rng) {
  int offset = stride > 1 ? rng.uniform_int(0, stride - 1) : 0;
  return coarsify_demo_offset(fine, stride, offset);
}

Dataset Dataset::build(std::vector<Trajectory> trajs) {
  if (trajs.empty()) throw std::invalid_argument("dataset: no trajectories");
  for (const Trajectory& t : trajs) t.validate();
  Dataset ds;
  ds.native_rate = trajs[0].rate;
  ds.norm = Normalizer::fit(trajs);
  ds.trajs = std::move(trajs);
  return ds;
}

int Dataset::window_count(int traj, int t_obs, int t_act) const {
  (void)t_obs;
  int t = trajs[static_cast<size_t>(traj)].length();
  // i0 ranges over [1, T + 1 - T_a]: slot 1 needs act[i0-1], the variant-0
  // tail ends at act[i0 + T_a - 2].
  return std::max(0, t + 1 - t_act);
}

WindowGroup make_window_group(const Dataset& ds, int traj, int i0, const DiSPoConfig& cfg,
                              const AugmentConfig& aug, BatchStats* stats) {
  const Trajectory& tr = ds.trajs[static_cast<size_t>(traj)];
  int t = tr.length();
  int t_o = cfg.t_obs, t_a = cfg.t_act;
  if (i0 < 1 || i0 > t + 1 - t_a) {
    throw std::out_of_range("window: start " + std::to_string(i0) + " of trajectory length " +
                            std::to_string(t));
  }
  if (static_cast<int>(tr.obs[0].size()) != cfg.d_obs ||
      static_cast<int>(tr.act[0].size()) != cfg.d_act) {
    throw std::invalid_argument("window: trajectory dims " + std::to_string(tr.obs[0].size()) +
                                "/" + std::to_string(tr.act[0].size()) +
                                " do not match config " + std::to_string(cfg.d_obs) + "/" +
                                std::to_string(cfg.d_act));
  }
  Tensor obs({t_o, cfg.d_obs});
  for (int s = 0; s < t_o; ++s) {
    std::vector<double> row = ds.norm.normalize_obs(tr.obs[static_cast<size_t>(i0 + s)]);
    for (int j = 0; j < cfg.d_obs; ++j) obs.at(s, j) = row[static_cast<size_t>(j)];
  }

  WindowGroup group;
  std::vector<int> divisors = {1};
  for (int m : aug.rate_divisors) divisors.push_back(m);
  for (int m : divisors) {
    if (m < 1) throw std::invalid_argument("augment: rate divisor must be >= 1");
    int base = i0 + t_o - 2;  // act index of the arrival at the latest obs time
    int last = base + (t_a - t_o) * m;
    if (last > t - 1) {
      if (stats) ++stats->skipped_variants;
      continue;
    }
    AugmentedWindow w;
    w.source_id = i0;
    w.obs = obs;
    w.rate = ds.native_rate / m;
    w.rate_factor = static_cast<double>(m);
    w.act = Tensor({t_a, cfg.d_act});
    w.r_act.assign(static_cast<size_t>(t_a), 1.0);
    w.act_denorm.reserve(static_cast<size_t>(t_a * cfg.d_act));
    for (int s = 0; s < t_a; ++s) {
      // Native arrivals for the first T_o slots, then the tail continues
      // from the latest-observation time at the coarser step m.
      int idx = s < t_o ? i0 + s - 1 : base + (s - t_o + 1) * m;
      if (s >= t_o) w.r_act[static_cast<size_t>(s)] = static_cast<double>(m);
      const std::vector<double>& raw = tr.act[static_cast<size_t>(idx)];
      std::vector<double> nrm = ds.norm.normalize_act(raw);
      for (int j = 0; j < cfg.d_act; ++j) {
        w.act.at(s, j) = nrm[static_cast<size_t>(j)];
        w.act_denorm.push_back(raw[static_cast<size_t>(j)]);
      }
    }
    group.variants.push_back(std::move(w));
  }
  return group;
}

std::vector<WindowGroup> make_training_batch(const Dataset& ds, const DiSPoConfig& cfg,
                                             const AugmentConfig& aug, int count, Rng& rng,
                                             BatchStats* stats) {
  long total = 0;
  std::vector<long> cum;
  for (size_t i = 0; i < ds.trajs.size(); ++i) {
    total += ds.window_count(static_cast<int>(i), cfg.t_obs, cfg.t_act);
    cum.push_back(total);
  }
  if (total == 0) throw std::runtime_error("dataset: no window fits the config horizons");
  std::vector<WindowGroup> batch;
  batch.reserve(static_cast<size_t>(count));
  for (int b = 0; b < count; ++b) {
    long pick = rng.uniform_int(0, static_cast<int>(total) - 1);
    size_t traj = 0;
    while (cum[traj] <= pick) ++traj;
    long local = pick - (traj > 0 ? cum[traj - 1] : 0);
    int i0 = 1 + static_cast<int>(local);
    batch.push_back(make_window_group(ds, static_cast<int>(traj), i0, cfg, aug, stats));
  }
  return batch;
}

}  // namespace dispo
