#include "config.hpp"

#include "rieif/dataio.hpp"
#include "rieif/error.hpp"

namespace rieif::cli {

Json default_config() {
  const model::ModelConfig m;
  const train::TrainConfig t;
  const pipeline::EvalSpec e;
  const pipeline::DiagnoseSpec d;
  Json c;
  c["seed"] = 0;
  c["panel"] = "";
  c["kg"] = "";
  c["out"] = "";
  c["graph"] = {{"mode", "kg"}, {"seed", 0}};
  c["model"] = {{"K", m.K},         {"tau", m.tau},         {"D", m.D},
                {"H", m.H},         {"L", m.L},             {"d_pe", m.d_pe},
                {"T_seg", m.T_seg}, {"epsilon", m.epsilon}, {"head_merge", m.head_merge},
                {"ablation", "full"}};
  c["train"] = {{"lambda_scale", t.lambda_scale}, {"lambda_shape", t.lambda_shape}, {"base_lr", t.base_lr},
                {"max_epochs", t.max_epochs},     {"patience", t.patience},         {"batch_size", t.batch_size},
                {"weight_decay", t.weight_decay}, {"clip_norm", t.clip_norm},       {"train_frac", t.train_frac},
                {"val_frac", t.val_frac},         {"train_stride", t.train_stride}, {"rho", t.rho},
                {"block_len", t.block_len},       {"targets", Json::array()}};
  c["eval"] = {{"checkpoint", ""},
               {"seeds", 3},
               {"rhos", e.rhos},
               {"sigmas", e.sigmas},
               {"block_len", e.block_len},
               {"target", e.target},
               {"baselines", Json::array()},
               {"kalman_process_var", e.kalman.process_var},
               {"kalman_obs_var", e.kalman.obs_var},
               {"raw_units", e.raw_units},
               {"dataset", e.dataset}};
  c["diagnose"] = {{"k_nn", d.k_nn}, {"max_samples", d.max_samples}, {"pairs", d.pairs},
                   {"max_edges", d.max_edges}, {"bins", d.bins}};
  c["generator"] = Json::parse(data::generator_spec_to_json(data::GeneratorSpec{}));
  c["generator"].erase("seed");  // the run seed drives the generator
  return c;
}

void merge_config_file(Json& base, const std::filesystem::path& path) {
  Json doc;
  try {
    doc = Json::parse(data::read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what(), 0, e.byte);
  }
  if (!doc.is_object()) throw ConfigError("config " + path.string() + ": expected a JSON object");
  if (doc.contains("config") && doc.contains("command")) doc = doc["config"];  // a run manifest
  base.merge_patch(doc);
}

namespace {

template <class T>
T get(const Json& c, const char* section, const char* key) {
  try {
    return c.at(section).at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config ") + section + "." + key + ": " + e.what());
  }
}

}  // namespace

model::ModelConfig model_config(const Json& c, std::size_t nodes) {
  model::ModelConfig m;
  m.nodes = nodes;
  m.K = get<std::size_t>(c, "model", "K");
  m.tau = get<std::size_t>(c, "model", "tau");
  m.D = get<std::size_t>(c, "model", "D");
  m.H = get<std::size_t>(c, "model", "H");
  m.L = get<std::size_t>(c, "model", "L");
  m.d_pe = get<std::size_t>(c, "model", "d_pe");
  m.T_seg = get<std::size_t>(c, "model", "T_seg");
  m.epsilon = get<double>(c, "model", "epsilon");
  m.head_merge = get<bool>(c, "model", "head_merge");
  m.ablation = model::parse_ablation(get<std::string>(c, "model", "ablation"));
  m.validate();
  return m;
}

train::TrainConfig train_config(const Json& c) {
  train::TrainConfig t;
  t.lambda_scale = get<double>(c, "train", "lambda_scale");
  t.lambda_shape = get<double>(c, "train", "lambda_shape");
  t.base_lr = get<double>(c, "train", "base_lr");
  t.max_epochs = get<std::size_t>(c, "train", "max_epochs");
  t.patience = get<std::size_t>(c, "train", "patience");
  t.batch_size = get<std::size_t>(c, "train", "batch_size");
  t.weight_decay = get<double>(c, "train", "weight_decay");
  t.clip_norm = get<double>(c, "train", "clip_norm");
  t.train_frac = get<double>(c, "train", "train_frac");
  t.val_frac = get<double>(c, "train", "val_frac");
  t.train_stride = get<std::size_t>(c, "train", "train_stride");
  t.rho = get<double>(c, "train", "rho");
  t.block_len = get<std::size_t>(c, "train", "block_len");
  t.targets = get<std::vector<std::string>>(c, "train", "targets");
  t.seed = c.at("seed").get<std::uint64_t>();
  t.validate();
  return t;
}

pipeline::EvalSpec eval_spec(const Json& c) {
  pipeline::EvalSpec e;
  const Json& seeds = c.at("eval").at("seeds");
  const auto base = c.at("seed").get<std::uint64_t>();
  e.seeds.clear();
  if (seeds.is_number_unsigned() || seeds.is_number_integer()) {
    const auto count = seeds.get<std::int64_t>();
    if (count < 1) throw ConfigError("config eval.seeds: need at least one seed");
    for (std::int64_t k = 0; k < count; ++k) e.seeds.push_back(base + static_cast<std::uint64_t>(k));
  } else {
    e.seeds = get<std::vector<std::uint64_t>>(c, "eval", "seeds");
  }
  e.rhos = get<std::vector<double>>(c, "eval", "rhos");
  e.sigmas = get<std::vector<double>>(c, "eval", "sigmas");
  e.block_len = get<std::size_t>(c, "eval", "block_len");
  e.target = get<std::string>(c, "eval", "target");
  e.dataset = get<std::string>(c, "eval", "dataset");
  e.raw_units = get<bool>(c, "eval", "raw_units");
  e.kalman.process_var = get<double>(c, "eval", "kalman_process_var");
  e.kalman.obs_var = get<double>(c, "eval", "kalman_obs_var");
  for (const auto& name : get<std::vector<std::string>>(c, "eval", "baselines")) {
    if (name == "all") {
      e.baselines = {baselines::Method::Linear, baselines::Method::Spline, baselines::Method::Kalman};
      break;
    }
    if (name != "none") e.baselines.push_back(baselines::parse_method(name));
  }
  return e;
}

pipeline::DiagnoseSpec diagnose_spec(const Json& c) {
  pipeline::DiagnoseSpec d;
  d.k_nn = get<std::size_t>(c, "diagnose", "k_nn");
  d.max_samples = get<std::size_t>(c, "diagnose", "max_samples");
  d.pairs = get<std::size_t>(c, "diagnose", "pairs");
  d.max_edges = get<std::size_t>(c, "diagnose", "max_edges");
  d.bins = get<std::size_t>(c, "diagnose", "bins");
  d.seed = c.at("seed").get<std::uint64_t>();
  return d;
}

data::GeneratorSpec generator_spec(const Json& c) {
  data::GeneratorSpec g = data::parse_generator_spec(c.at("generator").dump());
  g.seed = c.at("seed").get<std::uint64_t>();
  return g;
}

Json split_list(const std::string& s) {
  Json out = Json::array();
  std::size_t pos = 0;
  while (pos <= s.size() && !s.empty()) {
    const std::size_t comma = s.find(',', pos);
    const std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace rieif::cli
