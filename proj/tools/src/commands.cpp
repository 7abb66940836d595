#include "commands.hpp"

#include <cstdio>
#include <filesystem>

#include "rieif/error.hpp"

namespace rieif::cli {

namespace fs = std::filesystem;

namespace {

fs::path out_dir(const Json& c) {
  const auto out = c.at("out").get<std::string>();
  if (out.empty()) throw ConfigError("no output directory (--out)");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
  return out;
}

std::string required_path(const Json& c, const char* key, const char* flag) {
  const auto p = c.at(key).get<std::string>();
  if (p.empty()) throw ConfigError(std::string("missing input: ") + flag);
  return p;
}

/// Writes `text` and records its hash under `name`.
void emit(Json& outputs, const fs::path& dir, const std::string& name, const std::string& text) {
  data::write_text_file(dir / name, text);
  outputs[name] = pipeline::hash_hex(text);
}

void write_manifest(const fs::path& dir, const std::string& command, const Json& c, const Json& inputs,
                    const Json& outputs, const Json& extra = Json::object()) {
  Json m;
  m["command"] = command;
  m["config"] = c;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  data::write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

kg::KnowledgeGraph load_graph(const Json& c, const data::RawPanel& raw, Json& inputs) {
  const std::string path = c.at("kg").get<std::string>();
  kg::KnowledgeGraph g;
  if (path.empty()) {
    g = kg::KnowledgeGraph(raw.node_names, {});
  } else {
    g = kg::load_kg_json(path);
    inputs["kg"] = {{"path", path}, {"hash", pipeline::file_hash(path)}};
  }
  const auto mode = c.at("graph").at("mode").get<std::string>();
  if (mode == "random") {
    g = kg::random_graph_like(g, c.at("graph").at("seed").get<std::uint64_t>());
  } else if (mode != "kg") {
    throw ConfigError("graph mode must be 'kg' or 'random', got '" + mode + "'");
  }
  return g;
}

struct Loaded {
  train::Experiment ex;
  Json inputs;
};

Loaded load_experiment(const Json& c, std::size_t t_seg) {
  Loaded l;
  const std::string panel = required_path(c, "panel", "--panel");
  data::RawPanel raw = data::load_panel_csv(panel);
  l.inputs["panel"] = {{"path", panel}, {"hash", pipeline::file_hash(panel)}};
  const kg::KnowledgeGraph g = load_graph(c, raw, l.inputs);
  const auto& t = c.at("train");
  l.ex = train::make_experiment(std::move(raw), g, t.at("train_frac").get<double>(), t.at("val_frac").get<double>(),
                                t_seg);
  return l;
}

void write_reports(const fs::path& dir, Json& outputs, const pipeline::EvalOutput& r) {
  emit(outputs, dir, "metrics.csv", metrics::reports_csv(r.rows, r.means));
  emit(outputs, dir, "metrics.json", metrics::reports_json(r.rows, r.means));
  for (const auto& m : r.means) {
    std::printf("%-22s rho=%-5g sigma=%-5g snr_db=%8.3f r2=%7.4f n=%zu\n", m.method.c_str(), m.rho, m.sigma, m.snr_db,
                m.reg.r2, m.reg.n);
  }
}

}  // namespace

void cmd_gen_data(const Json& c) {
  const fs::path dir = out_dir(c);
  const data::GeneratorSpec spec = generator_spec(c);
  const data::SyntheticData sd = data::generate_synthetic_panel(spec, spec.seed);
  data::save_panel_csv(sd.panel, dir / "panel.csv");
  kg::save_kg_json(sd.graph, dir / "kg.json");
  Json outputs;
  outputs["panel.csv"] = pipeline::file_hash(dir / "panel.csv");
  outputs["kg.json"] = pipeline::file_hash(dir / "kg.json");
  write_manifest(dir, "gen-data", c, Json::object(), outputs);
  std::printf("wrote %zu x %zu panel and %zu-edge graph to %s\n", sd.panel.nodes(), sd.panel.steps,
              sd.graph.edges().size(), dir.string().c_str());
}

void cmd_train(const Json& c) {
  const fs::path dir = out_dir(c);
  const std::size_t t_seg = c.at("model").at("T_seg").get<std::size_t>();
  Loaded l = load_experiment(c, t_seg);
  const model::ModelConfig cfg = model_config(c, l.ex.panel.nodes());
  const train::TrainConfig tc = train_config(c);
  const train::TrainResult res = train::train(l.ex, cfg, tc);
  model::save_checkpoint(cfg, res.best_params, dir / "checkpoint.json");
  Json outputs;
  outputs["checkpoint.json"] = pipeline::file_hash(dir / "checkpoint.json");
  emit(outputs, dir, "history.csv", train::history_csv(res.history));
  Json extra;
  extra["training"] = {{"epochs_run", res.history.size()},
                       {"best_epoch", res.best_epoch},
                       {"best_val_loss", res.best_val},
                       {"early_stopped", res.early_stopped}};
  write_manifest(dir, "train", c, l.inputs, outputs, extra);
  std::printf("trained %s: %zu epochs, best val loss %.6g at epoch %zu\n", model::ablation_name(cfg.ablation).c_str(),
              res.history.size(), res.best_val, res.best_epoch);
}

void cmd_eval(const Json& c) {
  const fs::path dir = out_dir(c);
  const std::string ckpt = c.at("eval").at("checkpoint").get<std::string>();
  if (ckpt.empty()) throw ConfigError("missing input: --checkpoint");
  auto [cfg, params] = model::load_checkpoint(ckpt);
  Loaded l = load_experiment(c, cfg.T_seg);
  l.inputs["checkpoint"] = {{"path", ckpt}, {"hash", pipeline::file_hash(ckpt)}};
  if (cfg.nodes != l.ex.panel.nodes()) {
    throw ConfigError("checkpoint expects N=" + std::to_string(cfg.nodes) + " but the panel has " +
                      std::to_string(l.ex.panel.nodes()) + " nodes");
  }
  pipeline::EvalSpec spec = eval_spec(c);
  spec.method = cfg.ablation == model::Ablation{} ? "rieif" : "rieif-" + model::ablation_name(cfg.ablation);
  const model::GraphContext graph = model::make_graph_context(l.ex.graph, cfg.d_pe);
  const pipeline::EvalOutput r = pipeline::evaluate(l.ex, {&cfg, &params, &graph}, cfg.T_seg, spec);
  Json outputs;
  write_reports(dir, outputs, r);
  write_manifest(dir, "eval", c, l.inputs, outputs);
}

void cmd_baseline(const Json& c) {
  const fs::path dir = out_dir(c);
  const std::size_t t_seg = c.at("model").at("T_seg").get<std::size_t>();
  Loaded l = load_experiment(c, t_seg);
  pipeline::EvalSpec spec = eval_spec(c);
  spec.include_model = false;
  if (spec.baselines.empty()) {
    spec.baselines = {baselines::Method::Linear, baselines::Method::Spline, baselines::Method::Kalman};
  }
  const pipeline::EvalOutput r = pipeline::evaluate(l.ex, {}, t_seg, spec);
  Json outputs;
  write_reports(dir, outputs, r);
  write_manifest(dir, "baseline", c, l.inputs, outputs);
}

void cmd_diagnose(const Json& c) {
  const fs::path dir = out_dir(c);
  const std::string panel = required_path(c, "panel", "--panel");
  const data::RawPanel raw = data::load_panel_csv(panel);
  Json inputs;
  inputs["panel"] = {{"path", panel}, {"hash", pipeline::file_hash(panel)}};
  // snapshot geometry of the whole record, each node z-scored over all of it
  const data::StandardizedPanel z = data::zscore_standardize(raw, {0, raw.steps});
  const pipeline::DiagnoseSpec spec = diagnose_spec(c);
  const pipeline::DiagnoseReport r = pipeline::diagnose(z.y, z.nodes(), z.steps, spec);
  Json outputs;
  emit(outputs, dir, "diagnose.json", pipeline::diagnose_json(r, spec));
  emit(outputs, dir, "curvature.csv", pipeline::curvature_csv(r));
  write_manifest(dir, "diagnose", c, inputs, outputs);
  std::printf("distortion mean %.4f, violation rate %.4f, curvature mean %.4f over %zu edges%s\n",
              r.distortion.mean_ratio, r.distortion.violation_rate, r.curvature.mean, r.curvature.kappa.size(),
              r.disconnected ? " (sample graph is disconnected)" : "");
}

}  // namespace rieif::cli
