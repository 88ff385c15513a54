#include "dispo/config.hpp"

#include <fstream>
#include <stdexcept>

#include "config_json.hpp"
#include "dispo/envs.hpp"
#include "dispo/rollout.hpp"

namespace dispo {

namespace {

using nlohmann::json;

AdamWConfig optim_from_json(const json& j, AdamWConfig base) {
  for (const auto& [key, val] : j.items()) {
    if (key == "lr") base.lr = val.get<double>();
    else if (key == "weight_decay") base.weight_decay = val.get<double>();
    else if (key == "beta1") base.beta1 = val.get<double>();
    else if (key == "beta2") base.beta2 = val.get<double>();
    else if (key == "eps") base.eps = val.get<double>();
    else throw std::invalid_argument("config: unknown optim key '" + key + "'");
  }
  return base;
}

}  // namespace

void RunConfig::resolve() {
  const TaskInfo& info = task_info(task);
  if (model.d_obs == 0) model.d_obs = info.d_obs;
  if (model.d_act == 0) model.d_act = info.d_act;
  if (model.d_obs != info.d_obs || model.d_act != info.d_act) {
    throw std::invalid_argument("config: model dims disagree with task " + task);
  }
  model.validate();
  if (epochs < 1 || demos < 1 || stride < 1 || batch_size < 1) {
    throw std::invalid_argument("config: counts must be positive");
  }
  if (eval_cadence < 1 || eval_episodes < 0 || episodes < 1) {
    throw std::invalid_argument("config: evaluation counts out of range");
  }
  if (!(fine_rate > 0.0)) throw std::invalid_argument("config: fine_rate must be positive");
  for (int m : rate_divisors) {
    if (m < 1) throw std::invalid_argument("config: rate divisors must be >= 1");
  }
  for (double s : eval_scales) {
    if (!(s > 0.0)) throw std::invalid_argument("config: eval scales must be positive");
  }
  obs_mode_from_string(obs_mode);
  rollout_mode_from_string(ablation);
}

RunConfig run_config_from_json_text(const std::string& text) {
  json j = json::parse(text);
  RunConfig rc;
  for (const auto& [key, val] : j.items()) {
    if (key == "task") rc.task = val.get<std::string>();
    else if (key == "seed") rc.seed = val.get<uint64_t>();
    else if (key == "model") rc.model = detail::model_config_from_json(val, rc.model);
    else if (key == "optim") rc.optim = optim_from_json(val, rc.optim);
    else if (key == "batch_size") rc.batch_size = val.get<int>();
    else if (key == "steps_per_epoch") rc.steps_per_epoch = val.get<int>();
    else if (key == "epochs") rc.epochs = val.get<int>();
    else if (key == "eval_cadence") rc.eval_cadence = val.get<int>();
    else if (key == "eval_episodes") rc.eval_episodes = val.get<int>();
    else if (key == "rate_divisors") rc.rate_divisors = val.get<std::vector<int>>();
    else if (key == "demos") rc.demos = val.get<int>();
    else if (key == "stride") rc.stride = val.get<int>();
    else if (key == "fine_rate") rc.fine_rate = val.get<double>();
    else if (key == "episodes") rc.episodes = val.get<int>();
    else if (key == "eval_scales") rc.eval_scales = val.get<std::vector<double>>();
    else if (key == "obs_mode") rc.obs_mode = val.get<std::string>();
    else if (key == "ablation") rc.ablation = val.get<std::string>();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return rc;
}

std::string run_config_to_json_text(const RunConfig& rc) {
  json j{{"task", rc.task},
         {"seed", rc.seed},
         {"model", detail::model_config_to_json(rc.model)},
         {"optim",
          {{"lr", rc.optim.lr},
           {"weight_decay", rc.optim.weight_decay},
           {"beta1", rc.optim.beta1},
           {"beta2", rc.optim.beta2},
           {"eps", rc.optim.eps}}},
         {"batch_size", rc.batch_size},
         {"steps_per_epoch", rc.steps_per_epoch},
         {"epochs", rc.epochs},
         {"eval_cadence", rc.eval_cadence},
         {"eval_episodes", rc.eval_episodes},
         {"rate_divisors", rc.rate_divisors},
         {"demos", rc.demos},
         {"stride", rc.stride},
         {"fine_rate", rc.fine_rate},
         {"episodes", rc.episodes},
         {"eval_scales", rc.eval_scales},
         {"obs_mode", rc.obs_mode},
         {"ablation", rc.ablation}};
  return j.dump(1) + "\n";
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return run_config_from_json_text(text);
}

void echo_run_config(const RunConfig& rc, const std::string& out_dir) {
  std::ofstream out(out_dir + "/config.json");
  if (!out) throw std::runtime_error("config: cannot write " + out_dir + "/config.json");
  out << run_config_to_json_text(rc);
}

}  // namespace dispo
