#include "dispo/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "config_json.hpp"

namespace dispo {

namespace {

using nlohmann::json;

void write_f32_le(std::ofstream& out, double v) {
  float f = static_cast<float>(v);
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  char b[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
               static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
  out.write(b, 4);
}

double read_f32_le(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: blob truncated");
  uint32_t bits = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
                  (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return static_cast<double>(f);
}

}  // namespace

void save_checkpoint(const std::string& dir, const DiSPoModel& model, const Normalizer& norm,
                     double native_rate) {
  std::filesystem::create_directories(dir);
  auto named = model.named_parameters();
  json params = json::array();
  long offset = 0;
  for (const auto& [name, t] : named) {
    json p{{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"size", t.size()}};
    params.push_back(p);
    offset += t.size() * 4;
  }
  json manifest{{"format", "dispo-checkpoint-v1"},
                {"dtype", "float32"},
                {"blob", "weights.bin"},
                {"native_rate", native_rate},
                {"config", detail::model_config_to_json(model.cfg)},
                {"schedule", {{"kind", model.cfg.schedule_kind}, {"steps", model.schedule.steps}}},
                {"normalizer",
                 {{"obs_min", norm.obs_min},
                  {"obs_max", norm.obs_max},
                  {"act_min", norm.act_min},
                  {"act_max", norm.act_max}}},
                {"params", params}};
  {
    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("checkpoint: cannot write " + dir + "/manifest.json");
    mf << manifest.dump(1) << "\n";
  }
  std::ofstream blob(dir + "/weights.bin", std::ios::binary);
  if (!blob) throw std::runtime_error("checkpoint: cannot write " + dir + "/weights.bin");
  for (const auto& [name, t] : named) {
    for (int64_t i = 0; i < t.size(); ++i) write_f32_le(blob, t.data()[i]);
  }
}

Checkpoint load_checkpoint(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw std::runtime_error("checkpoint: cannot open " + dir + "/manifest.json");
  json manifest = json::parse(mf);
  if (manifest.at("format").get<std::string>() != "dispo-checkpoint-v1") {
    throw std::runtime_error("checkpoint: unknown format tag");
  }
  if (manifest.at("dtype").get<std::string>() != "float32") {
    throw std::runtime_error("checkpoint: unsupported dtype");
  }
  DiSPoConfig cfg = detail::model_config_from_json(manifest.at("config"));
  cfg.validate();
  int steps = manifest.at("schedule").at("steps").get<int>();
  if (steps != cfg.diffusion_steps) {
    throw std::runtime_error("checkpoint: schedule steps disagree with config");
  }

  Checkpoint ck;
  Rng init_rng(0);
  ck.model = DiSPoModel::init(cfg, init_rng);
  ck.native_rate = manifest.at("native_rate").get<double>();
  const json& nj = manifest.at("normalizer");
  ck.norm.obs_min = nj.at("obs_min").get<std::vector<double>>();
  ck.norm.obs_max = nj.at("obs_max").get<std::vector<double>>();
  ck.norm.act_min = nj.at("act_min").get<std::vector<double>>();
  ck.norm.act_max = nj.at("act_max").get<std::vector<double>>();

  auto named = ck.model.named_parameters();
  const json& params = manifest.at("params");
  if (params.size() != named.size()) {
    throw std::runtime_error("checkpoint: parameter count mismatch");
  }
  std::string blob_name = manifest.at("blob").get<std::string>();
  std::ifstream blob(dir + "/" + blob_name, std::ios::binary);
  if (!blob) throw std::runtime_error("checkpoint: cannot open blob " + blob_name);
  long offset = 0;
  for (size_t i = 0; i < named.size(); ++i) {
    const json& p = params[i];
    auto& [name, t] = named[i];
    if (p.at("name").get<std::string>() != name) {
      throw std::runtime_error("checkpoint: parameter order mismatch at " + name);
    }
    if (p.at("shape").get<Shape>() != t.shape()) {
      throw std::runtime_error("checkpoint: shape mismatch at " + name);
    }
    if (p.at("offset").get<long>() != offset) {
      throw std::runtime_error("checkpoint: offset mismatch at " + name);
    }
    for (int64_t e = 0; e < t.size(); ++e) t.data()[e] = read_f32_le(blob);
    offset += t.size() * 4;
  }
  return ck;
}

}  // namespace dispo
