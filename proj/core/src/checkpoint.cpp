#include <json.hpp>

#include "rieif/error.hpp"
#include "rieif/model.hpp"

namespace rieif::model {

namespace {

using nlohmann::ordered_json;

ordered_json config_to_json(const ModelConfig& c) {
  ordered_json j;
  j["N"] = c.nodes;
  j["K"] = c.K;
  j["tau"] = c.tau;
  j["D"] = c.D;
  j["H"] = c.H;
  j["L"] = c.L;
  j["d_pe"] = c.d_pe;
  j["T_seg"] = c.T_seg;
  j["epsilon"] = c.epsilon;
  j["head_merge"] = c.head_merge;
  j["ablation"] = ablation_name(c.ablation);
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.nodes = j.at("N").get<std::size_t>();
  c.K = j.at("K").get<std::size_t>();
  c.tau = j.at("tau").get<std::size_t>();
  c.D = j.at("D").get<std::size_t>();
  c.H = j.at("H").get<std::size_t>();
  c.L = j.at("L").get<std::size_t>();
  c.d_pe = j.at("d_pe").get<std::size_t>();
  c.T_seg = j.at("T_seg").get<std::size_t>();
  c.epsilon = j.at("epsilon").get<double>();
  c.head_merge = j.at("head_merge").get<bool>();
  c.ablation = parse_ablation(j.at("ablation").get<std::string>());
  return c;
}

}  // namespace

std::string checkpoint_to_json(const ModelConfig& cfg, const ParamMap& params) {
  ordered_json doc;
  doc["version"] = kCheckpointVersion;
  doc["config"] = config_to_json(cfg);
  ordered_json ps = ordered_json::object();
  for (const auto& [name, a] : params) {
    ps[name] = {{"shape", a.shape()}, {"data", a.storage()}};
  }
  doc["params"] = std::move(ps);
  return doc.dump() + "\n";
}

std::pair<ModelConfig, ParamMap> checkpoint_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), 0, e.byte);
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    }
    ModelConfig cfg = config_from_json(doc.at("config"));
    ParamMap params;
    for (const auto& [name, entry] : doc.at("params").items()) {
      params.emplace(name, nd::Array(entry.at("shape").get<nd::Shape>(), entry.at("data").get<std::vector<double>>()));
    }
    check_params(cfg, params);
    return {cfg, std::move(params)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ModelConfig& cfg, const ParamMap& params, const std::filesystem::path& path) {
  data::write_text_file(path, checkpoint_to_json(cfg, params));
}

std::pair<ModelConfig, ParamMap> load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint '" + path.string() + "' does not exist");
  return checkpoint_from_json(data::read_text_file(path));
}

}  // namespace rieif::model
