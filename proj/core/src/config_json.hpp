#pragma once

// Source-private JSON (de)serialization for DiSPoConfig, shared by the
// checkpoint manifest and the run-config loader. Not installed.

#include <json.hpp>

#include "dispo/model.hpp"

namespace dispo::detail {

inline nlohmann::json model_config_to_json(const DiSPoConfig& c) {
  return nlohmann::json{{"d_model", c.d_model},
                        {"n_state", c.n_state},
                        {"n_block", c.n_block},
                        {"t_obs", c.t_obs},
                        {"t_act", c.t_act},
                        {"diffusion_steps", c.diffusion_steps},
                        {"d_obs", c.d_obs},
                        {"d_act", c.d_act},
                        {"conv_width", c.conv_width},
                        {"expand", c.expand},
                        {"schedule_kind", c.schedule_kind},
                        {"tau_rnc", c.tau_rnc},
                        {"w_mse", c.w_mse},
                        {"w_rnc", c.w_rnc},
                        {"exec_index", c.exec_index}};
}

// Merge semantics: keys present in `j` override `base`; unknown keys throw.
inline DiSPoConfig model_config_from_json(const nlohmann::json& j, DiSPoConfig base = {}) {
  for (const auto& [key, val] : j.items()) {
    if (key == "d_model") base.d_model = val.get<int>();
    else if (key == "n_state") base.n_state = val.get<int>();
    else if (key == "n_block") base.n_block = val.get<int>();
    else if (key == "t_obs") base.t_obs = val.get<int>();
    else if (key == "t_act") base.t_act = val.get<int>();
    else if (key == "diffusion_steps") base.diffusion_steps = val.get<int>();
    else if (key == "d_obs") base.d_obs = val.get<int>();
    else if (key == "d_act") base.d_act = val.get<int>();
    else if (key == "conv_width") base.conv_width = val.get<int>();
    else if (key == "expand") base.expand = val.get<int>();
    else if (key == "schedule_kind") base.schedule_kind = val.get<std::string>();
    else if (key == "tau_rnc") base.tau_rnc = val.get<double>();
    else if (key == "w_mse") base.w_mse = val.get<double>();
    else if (key == "w_rnc") base.w_rnc = val.get<double>();
    else if (key == "exec_index") base.exec_index = val.get<int>();
    else throw std::invalid_argument("config: unknown model key '" + key + "'");
  }
  return base;
}

}  // namespace dispo::detail
