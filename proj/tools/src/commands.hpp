#pragma once

#include <cstdint>
#include <string>

#include "dispo/config.hpp"

namespace dispo {

struct GenDemosArgs {
  std::string task = "draw_rect";
  int n = 90;
  int stride = 2;
  double rate = 1.0;  // fine demonstration rate
  uint64_t seed = 1;
  std::string out = "demos.jsonl";  // fine originals land beside with _fine suffix
};

// All commands return process exit codes: 0 ok, 2 usage/config error,
// 3 numerical failure.
int cmd_gen_demos(const GenDemosArgs& args);

int cmd_train(const RunConfig& rc, const std::string& data_path, const std::string& out_dir);

int cmd_eval(const RunConfig& rc, const std::string& ckpt_dir, const std::string& out_dir);

struct DumpFeaturesArgs {
  std::string ckpt;
  std::string data;
  int k = 10;
  uint64_t seed = 1;
  std::string out = "features.csv";
};

int cmd_dump_features(const DumpFeaturesArgs& args);

}  // namespace dispo
