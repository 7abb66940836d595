#include "rieif/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

#include <json.hpp>

#include "rieif/error.hpp"
#include "rieif/rng.hpp"

namespace rieif::pipeline {

void EvalSpec::validate() const {
  if (seeds.empty() || rhos.empty() || sigmas.empty()) throw ConfigError("eval: seeds, rhos and sigmas must be non-empty");
  for (double r : rhos)
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("eval: rho must lie in (0, 1]");
  for (double s : sigmas)
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("eval: noise sigma must be finite and >= 0");
  if (block_len < 1) throw ConfigError("eval: block length must be >= 1");
  if (!include_model && baselines.empty()) throw ConfigError("eval: nothing to evaluate");
}

std::size_t default_target(const train::Experiment& ex, double rho) {
  std::size_t best = 0, most = 0;
  for (std::size_t i = 0; i < ex.panel.nodes(); ++i) {
    const std::size_t c = ex.proxies(i, rho).size();
    if (c > most) {
      most = c;
      best = i;
    }
  }
  return best;
}

std::vector<model::SegmentMask> test_masks(const train::Experiment& ex, std::size_t t_seg, std::size_t target,
                                           double rho, std::size_t block_len, std::uint64_t seed) {
  const auto segs = data::make_segments(ex.split.test, t_seg, t_seg);
  if (segs.empty()) throw ConfigError("eval: test split is shorter than one segment");
  std::vector<model::SegmentMask> out;
  out.reserve(segs.size());
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const std::size_t i_star =
        target == kRotateTarget ? static_cast<std::size_t>(derive_seed(seed, "target", k) % ex.panel.nodes()) : target;
    out.push_back(train::segment_blind_spot(ex, segs[k], i_star, rho, block_len, derive_seed(seed, "mask", k)));
  }
  return out;
}

std::vector<double> awgn_copy(const data::StandardizedPanel& panel, double sigma, std::uint64_t seed) {
  std::vector<double> y = panel.y;
  if (sigma == 0.0) return y;
  Rng rng = make_rng(seed, "noise", std::bit_cast<std::uint64_t>(sigma));
  std::normal_distribution<double> g(0.0, sigma);
  for (double& v : y) v += g(rng);
  return y;
}

std::vector<std::vector<train::Prediction>> baseline_predict(const train::Experiment& ex,
                                                             const std::vector<model::SegmentMask>& masks,
                                                             const baselines::BaselineSpec& spec,
                                                             const std::vector<double>& inputs, bool* fell_back) {
  const std::size_t T = ex.panel.steps;
  if (inputs.size() != ex.panel.nodes() * T) throw ShapeError("baseline: input panel is not N x T");
  std::vector<std::vector<train::Prediction>> out(masks.size());
  std::vector<std::uint8_t> hidden(T);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    const auto& sm = masks[k];
    for (std::size_t i : sm.nodes) {
      for (std::size_t t = 0; t < T; ++t) hidden[t] = (sm.block.contains(t) || ex.panel.raw_missing.missing(i, t)) ? 1 : 0;
      const std::span<const double> series(inputs.data() + i * T, T);
      const baselines::Recovery rec = baselines::recover(spec, series, hidden);
      if (fell_back && rec.fell_back) *fell_back = true;
      for (std::size_t t = sm.block.begin; t < sm.block.end; ++t) {
        if (ex.panel.raw_missing.missing(i, t)) continue;
        out[k].push_back({i, t, rec.values[t]});
      }
    }
  }
  return out;
}

namespace {

metrics::MetricReport score(const train::Experiment& ex, const std::vector<std::vector<train::Prediction>>& preds,
                            bool raw_units) {
  std::vector<double> p, g;
  std::vector<std::size_t> sizes;
  for (const auto& seg : preds) {
    sizes.push_back(seg.size());
    for (const auto& pr : seg) {
      double est = pr.value, truth = ex.panel.at(pr.node, pr.t);
      if (raw_units) {
        est = ex.panel.destandardize(pr.node, est);
        truth = ex.panel.destandardize(pr.node, truth);
      }
      p.push_back(est);
      g.push_back(truth);
    }
  }
  return metrics::pooled_report(p, g, sizes);
}

}  // namespace

EvalOutput evaluate(const train::Experiment& ex, const ModelHandle& model, std::size_t t_seg, const EvalSpec& spec) {
  spec.validate();
  if (spec.include_model) {
    if (!model.cfg || !model.params || !model.graph) throw ConfigError("eval: model requested but not supplied");
    if (model.cfg->nodes != ex.panel.nodes()) {
      throw ConfigError("eval: checkpoint expects N=" + std::to_string(model.cfg->nodes) + " but the panel has " +
                        std::to_string(ex.panel.nodes()));
    }
    model::check_params(*model.cfg, *model.params);
  }
  const std::size_t target = spec.target.empty()  ? default_target(ex, spec.rhos.front())
                             : spec.target == "all" ? kRotateTarget
                                                    : ex.panel.node_index(spec.target);
  EvalOutput out;
  for (std::uint64_t seed : spec.seeds) {
    for (double rho : spec.rhos) {
      const auto masks = test_masks(ex, t_seg, target, rho, spec.block_len, seed);
      for (double sigma : spec.sigmas) {
        const std::vector<double> inputs = awgn_copy(ex.panel, sigma, seed);
        auto tag = [&](metrics::MetricReport r, const std::string& method) {
          r.method = method;
          r.dataset = spec.dataset;
          r.target = target == kRotateTarget ? "all" : ex.panel.node_names[target];
          r.seed = seed;
          r.rho = rho;
          r.sigma = sigma;
          return r;
        };
        if (spec.include_model) {
          const auto preds = train::predict_masked(ex, *model.params, *model.graph, *model.cfg, masks,
                                                   sigma > 0.0 ? &inputs : nullptr);
          out.rows.push_back(tag(score(ex, preds, spec.raw_units), spec.method));
        }
        const std::size_t first_baseline = out.rows.size();
        for (baselines::Method m : spec.baselines) {
          baselines::BaselineSpec bs{m, spec.kalman};
          const auto preds = baseline_predict(ex, masks, bs, inputs);
          out.rows.push_back(tag(score(ex, preds, spec.raw_units), baselines::method_name(m)));
        }
        if (spec.baselines.size() > 1) {
          auto best = std::max_element(out.rows.begin() + static_cast<std::ptrdiff_t>(first_baseline), out.rows.end(),
                                       [](const auto& a, const auto& b) { return a.snr_db < b.snr_db; });
          metrics::MetricReport r = *best;
          r.method = "baseline-best";
          out.rows.push_back(r);
        }
      }
    }
  }
  out.means = metrics::mean_over_seeds(out.rows);
  return out;
}

DiagnoseReport diagnose(const std::vector<double>& y, std::size_t nodes, std::size_t steps, const DiagnoseSpec& spec) {
  auto [pc, g] = geo::build_knn_graph(y, nodes, steps, spec.max_samples, spec.k_nn, spec.seed);
  DiagnoseReport r;
  r.samples = g.size();
  r.edges = g.edges.size();
  const auto pairs = geo::graph_geodesics(pc, g, geo::sample_pairs(g.size(), spec.pairs, spec.seed));
  r.distortion = geo::distortion_report(pairs);
  r.disconnected = r.distortion.disconnected > 0;
  r.curvature = geo::curvature_summary(g, spec.max_edges, spec.bins, spec.seed);
  return r;
}

std::string diagnose_json(const DiagnoseReport& r, const DiagnoseSpec& spec) {
  nlohmann::ordered_json j;
  j["k_nn"] = spec.k_nn;
  j["samples"] = r.samples;
  j["edges"] = r.edges;
  j["seed"] = spec.seed;
  j["distortion"] = {{"mean_ratio", r.distortion.mean_ratio},
                     {"violation_rate", r.distortion.violation_rate},
                     {"lower_bound_rate", r.distortion.lower_bound_rate},
                     {"connected_pairs", r.distortion.connected},
                     {"disconnected_pairs", r.distortion.disconnected}};
  j["disconnected"] = r.disconnected;
  j["curvature"] = {{"variant", "ollivier-ricci, idleness 0, uniform neighbour measures"},
                    {"edges_evaluated", r.curvature.kappa.size()},
                    {"mean", r.curvature.mean},
                    {"variance", r.curvature.variance},
                    {"bin_edges", r.curvature.bin_edges},
                    {"counts", r.curvature.counts}};
  return j.dump(2) + "\n";
}

std::string curvature_csv(const DiagnoseReport& r) {
  std::string s = "edge,kappa\n";
  for (std::size_t k = 0; k < r.curvature.kappa.size(); ++k)
    s += std::to_string(k) + "," + data::format_double(r.curvature.kappa[k]) + "\n";
  return s;
}

std::string hash_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) { return hash_hex(data::read_text_file(path)); }

}  // namespace rieif::pipeline
