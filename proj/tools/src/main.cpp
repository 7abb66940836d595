// rieif: data generation, training, masked evaluation, baselines and manifold diagnostics.

#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "rieif/alloc.hpp"
#include "rieif/error.hpp"

namespace {

using rieif::cli::Json;

enum Exit { kOk = 0, kConfig = 2, kDivergence = 3, kIo = 4 };

// Flag values land here first and are applied over the config file afterwards.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, panel, kg, checkpoint, spec;
  std::optional<std::string> ablation, graph, targets, target, baseline;
  std::optional<std::uint64_t> graph_seed;
  std::optional<std::size_t> epochs, batch, patience, block, seeds, k_nn, samples, pairs, edges, nodes, steps;
  std::optional<double> lr, lambda_scale, lambda_shape, train_frac, train_rho;
  std::vector<double> rhos, sigmas;
  bool raw_units = false;
};

template <class T>
void set_if(Json& j, const std::optional<T>& v) {
  if (v) j = *v;
}

Json resolve(const Flags& f) {
  Json c = rieif::cli::default_config();
  if (!f.config.empty()) rieif::cli::merge_config_file(c, f.config);
  set_if(c["seed"], f.seed);
  set_if(c["out"], f.out);
  set_if(c["panel"], f.panel);
  set_if(c["kg"], f.kg);
  set_if(c["eval"]["checkpoint"], f.checkpoint);
  set_if(c["model"]["ablation"], f.ablation);
  set_if(c["graph"]["mode"], f.graph);
  set_if(c["graph"]["seed"], f.graph_seed);
  set_if(c["train"]["max_epochs"], f.epochs);
  set_if(c["train"]["batch_size"], f.batch);
  set_if(c["train"]["patience"], f.patience);
  set_if(c["train"]["base_lr"], f.lr);
  set_if(c["train"]["lambda_scale"], f.lambda_scale);
  set_if(c["train"]["lambda_shape"], f.lambda_shape);
  set_if(c["train"]["train_frac"], f.train_frac);
  set_if(c["train"]["rho"], f.train_rho);
  if (f.targets) c["train"]["targets"] = rieif::cli::split_list(*f.targets);
  if (f.block) c["train"]["block_len"] = c["eval"]["block_len"] = *f.block;
  set_if(c["eval"]["seeds"], f.seeds);
  set_if(c["eval"]["target"], f.target);
  if (f.baseline) c["eval"]["baselines"] = rieif::cli::split_list(*f.baseline);
  if (!f.rhos.empty()) c["eval"]["rhos"] = f.rhos;
  if (!f.sigmas.empty()) c["eval"]["sigmas"] = f.sigmas;
  if (f.raw_units) c["eval"]["raw_units"] = true;
  set_if(c["diagnose"]["k_nn"], f.k_nn);
  set_if(c["diagnose"]["max_samples"], f.samples);
  set_if(c["diagnose"]["pairs"], f.pairs);
  set_if(c["diagnose"]["max_edges"], f.edges);
  if (f.spec) rieif::cli::merge_config_file(c["generator"], *f.spec);
  set_if(c["generator"]["N"], f.nodes);
  set_if(c["generator"]["T"], f.steps);
  return c;
}

int run(const std::function<void(const Json&)>& cmd, const Flags& f) {
  try {
    cmd(resolve(f));
    return kOk;
  } catch (const rieif::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDivergence;
  } catch (const rieif::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const rieif::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  rieif::tune_allocator();
  CLI::App app{"Blind-spot recovery on knowledge-graph-structured time series"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", f.config, "JSON config or a previous run's manifest.json");
    s->add_option("--seed", f.seed, "Run seed (all randomness derives from it)");
    s->add_option("--out", f.out, "Output directory (created if missing)");
  };
  auto inputs = [&](CLI::App* s) {
    s->add_option("--panel", f.panel, "Panel CSV (one column per node)");
    s->add_option("--kg", f.kg, "Knowledge-graph JSON");
    s->add_option("--graph", f.graph, "kg | random")->check(CLI::IsMember({"kg", "random"}));
    s->add_option("--graph-seed", f.graph_seed, "Seed of the random topology");
    s->add_option("--train-frac", f.train_frac, "Chronological training fraction");
  };
  auto masking = [&](CLI::App* s) {
    s->add_option("--rho", f.rhos, "Proxy threshold(s)")->delimiter(',');
    s->add_option("--noise,--sigma", f.sigmas, "AWGN sigma(s) on the inputs")->delimiter(',');
    s->add_option("--seeds", f.seeds, "Number of mask seeds, counted from --seed");
    s->add_option("--block", f.block, "Blind-spot length |T_b|");
    s->add_option("--target", f.target, "Target node name, or 'all' to rotate targets");
    s->add_flag("--raw-units", f.raw_units, "Score in original units instead of z-scores");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic panel and its coupling graph");
  common(gen);
  gen->add_option("--spec", f.spec, "Generator spec JSON");
  gen->add_option("--nodes", f.nodes, "Number of nodes");
  gen->add_option("--steps", f.steps, "Number of time steps");

  CLI::App* tr = app.add_subcommand("train", "Fit the model on masked training segments");
  common(tr);
  inputs(tr);
  tr->add_option("--ablation", f.ablation, "Comma list: euclidean-attention,no-macro,no-micro,fixed-gate,node-wise-projection");
  tr->add_option("--epochs", f.epochs, "Maximum epochs");
  tr->add_option("--batch", f.batch, "Segments per batch");
  tr->add_option("--patience", f.patience, "Early-stopping patience");
  tr->add_option("--lr", f.lr, "Base learning rate");
  tr->add_option("--lambda-scale", f.lambda_scale, "Weight of the MSE term");
  tr->add_option("--lambda-shape", f.lambda_shape, "Weight of the cosine term");
  tr->add_option("--rho", f.train_rho, "Proxy threshold for training masks");
  tr->add_option("--block", f.block, "Blind-spot length");
  tr->add_option("--targets", f.targets, "Comma list of training target nodes (default: all)");

  CLI::App* ev = app.add_subcommand("eval", "Score a checkpoint on test-split blind spots");
  common(ev);
  inputs(ev);
  masking(ev);
  ev->add_option("--checkpoint", f.checkpoint, "checkpoint.json from train");
  ev->add_option("--baseline", f.baseline, "none | all | comma list of linear,spline,kalman");

  CLI::App* bl = app.add_subcommand("baseline", "Score the interpolation baselines only");
  common(bl);
  inputs(bl);
  masking(bl);
  bl->add_option("--method", f.baseline, "all | comma list of linear,spline,kalman");

  CLI::App* dg = app.add_subcommand("diagnose", "Geodesic distortion and curvature of the snapshot cloud");
  common(dg);
  dg->add_option("--panel", f.panel, "Panel CSV");
  dg->add_option("--k-nn", f.k_nn, "Neighbours per snapshot");
  dg->add_option("--samples", f.samples, "Maximum snapshots");
  dg->add_option("--pairs", f.pairs, "Distortion pairs");
  dg->add_option("--edges", f.edges, "Maximum curvature edges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (*gen) return run(rieif::cli::cmd_gen_data, f);
  if (*tr) return run(rieif::cli::cmd_train, f);
  if (*ev) return run(rieif::cli::cmd_eval, f);
  if (*bl) return run(rieif::cli::cmd_baseline, f);
  return run(rieif::cli::cmd_diagnose, f);
}
