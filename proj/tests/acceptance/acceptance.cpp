// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.
//   rieif_acceptance [--workdir DIR] [--only 1,3,6]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "rieif/alloc.hpp"
#include "rieif/eigen_sym.hpp"
#include "rieif/error.hpp"
#include "rieif/generator.hpp"
#include "rieif/ndgrad/gradcheck.hpp"
#include "rieif/pipeline.hpp"
#include "toy.hpp"

namespace {

namespace fs = std::filesystem;
using namespace rieif;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------------------------
// 1. gradients

Outcome gradients() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto toy = testing::make_toy(seed);
    const auto program = testing::toy_program(toy);
    const auto analytic = nd::evaluate_with_gradients(program, toy.params).grads;
    const auto numeric = nd::finite_difference_gradient(program, toy.params, 1e-5);
    // floor 1e-6: below it a 1e-5 central difference is dominated by rounding
    worst = std::max(worst, nd::max_relative_error(analytic, numeric, 1e-6));
    for (const auto& [name, a] : analytic) count += a.size();
  }
  const double elapsed = seconds_since(t0);
  o.check(worst < 1e-4, "max relative error " + fmt("%.3g", worst));
  o.check(elapsed < 10.0, "runtime " + fmt("%.2f s", elapsed));
  o.note("max rel err " + fmt("%.2e", worst) + " over " + std::to_string(count) + " entries, 3 instances, " +
         fmt("%.2f s", elapsed));
  return o;
}

// ---------------------------------------------------------------------------------------------
// 2. geometric invariants

std::vector<double> layer_attention(const testing::ToyInstance& toy, const nd::Array& h_in) {
  nd::Tape tape;
  nd::VarMap p;
  for (const auto& [name, a] : toy.params) p.emplace(name, tape.constant(a));
  return model::micro_stream_layer(tape.constant(h_in), toy.context, p, 0, toy.cfg, toy.cfg.T_seg, false, true)
      .attention.storage();
}

Outcome invariants() {
  Outcome o;
  std::size_t bad_pos = 0, bad_norm = 0, bad_rows = 0, bad_support = 0, bad_scale = 0, euclid_kept = 0, bad_gate = 0,
              bad_softplus = 0;
  double worst_scale = 0.0, min_euclid_change = INFINITY;
  const std::size_t cases = 1000;
  for (std::size_t c = 0; c < cases; ++c) {
    auto toy = testing::make_toy(1000 + c);
    const std::size_t n = toy.cfg.nodes, H = toy.cfg.H;
    toy.graph = kg::random_graph_like(toy.graph, c);
    toy.context = model::make_graph_context(toy.graph, toy.cfg.d_pe);
    const auto allowed = kg::attention_mask_matrix(toy.graph);

    model::ForwardTrace tr;
    model::predict_all(toy.params, toy.x, 1, toy.context, toy.cfg, &tr);
    for (double v : tr.h0.data()) bad_pos += !(v > 0.0);
    for (double v : tr.h_hat.data()) bad_pos += !(v > 0.0);
    const std::size_t D = toy.cfg.D;
    for (std::size_t r = 0; r < tr.z.dim(0); ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < D; ++k) s += tr.z.at(r, k) * tr.z.at(r, k);
      bad_norm += std::abs(std::sqrt(s) - 1.0) > 1e-6;
    }
    const nd::Array& att = tr.attention.front();
    for (std::size_t gh = 0; gh < toy.cfg.T_seg * H; ++gh)
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double a = att[(gh * n + i) * n + j];
          s += a;
          if (!allowed[i * n + j] && std::abs(a) > 1e-9) ++bad_support;
        }
        bad_rows += std::abs(s - 1.0) > 1e-9;
      }
    // u_total = g u_mic + (1 - g) u_mac lies channel-wise between the two
    const nd::Array u_total = [&] {
      nd::Array u(tr.h0.shape());
      for (std::size_t k = 0; k < u.size(); ++k) u[k] = tr.gate[k] * tr.u_micro[k] + (1 - tr.gate[k]) * tr.u_macro[k];
      return u;
    }();
    for (std::size_t k = 0; k < u_total.size(); ++k) {
      const double lo = std::min(tr.u_micro[k], tr.u_macro[k]), hi = std::max(tr.u_micro[k], tr.u_macro[k]);
      bad_gate += tr.gate[k] < 0.0 || tr.gate[k] > 1.0 || u_total[k] < lo - 1e-12 || u_total[k] > hi + 1e-12;
      // and the retraction actually uses it
      bad_gate += std::abs(tr.h_hat[k] - nd::softplus(tr.h0[k] + u_total[k])) > 1e-9;
    }

    const nd::Array h_in = testing::random_array(5000 + c, {toy.cfg.T_seg * n, D}, 0.05, 3.0);
    const auto base = layer_attention(toy, h_in);
    auto euclid = toy;
    euclid.cfg.ablation.euclidean_attention = true;
    const auto ebase = layer_attention(euclid, h_in);
    double emax = 0.0;
    for (double scale : {0.1, 10.0}) {
      nd::Array scaled = h_in;
      for (double& v : scaled.storage()) v *= scale;
      const auto a = layer_attention(toy, scaled);
      double d = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - base[k]));
      worst_scale = std::max(worst_scale, d);
      bad_scale += d > 1e-6;
      const auto e = layer_attention(euclid, scaled);
      for (std::size_t k = 0; k < e.size(); ++k) emax = std::max(emax, std::abs(e[k] - ebase[k]));
    }
    euclid_kept += emax <= 1e-6;
    min_euclid_change = std::min(min_euclid_change, emax);

    std::mt19937_64 rng(c);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int k = 0; k < 100; ++k) {
      const double a = u(rng), b = u(rng);
      bad_softplus += std::abs(nd::softplus(a) - nd::softplus(b)) > std::abs(a - b) + 1e-15;
    }
  }
  o.check(bad_pos == 0, std::to_string(bad_pos) + " non-positive H0/H_hat entries");
  o.check(bad_norm == 0, std::to_string(bad_norm) + " Z rows off the unit sphere");
  o.check(bad_rows == 0, std::to_string(bad_rows) + " attention rows not summing to 1");
  o.check(bad_support == 0, std::to_string(bad_support) + " attention weights outside the graph neighbourhood");
  o.check(bad_scale == 0, std::to_string(bad_scale) + " cases not scale invariant");
  o.check(euclid_kept == 0, std::to_string(euclid_kept) + " euclidean cases that stayed scale invariant");
  o.check(bad_gate == 0, std::to_string(bad_gate) + " gate bound violations");
  o.check(bad_softplus == 0, std::to_string(bad_softplus) + " softplus expansions");
  o.note(std::to_string(cases) + " cases; scale drift " + fmt("%.1e", worst_scale) +
         ", smallest euclidean drift " + fmt("%.2e", min_euclid_change));
  return o;
}

// ---------------------------------------------------------------------------------------------
// 3. oracle equivalences

// Max difference between the spectral projectors of two eigendecompositions, eigenvalues
// grouped where they agree to 1e-6 (degenerate eigenspaces have no canonical basis).
double projector_gap(const SymEigen& a, const testing::DenseEigen& b, std::size_t n) {
  double worst = 0.0;
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s + 1;
    while (e < n && b.values[e] - b.values[e - 1] < 1e-6) ++e;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double pa = 0.0, pb = 0.0;
        for (std::size_t k = s; k < e; ++k) {
          pa += a.vectors[i * n + k] * a.vectors[j * n + k];
          pb += b.vectors[i * n + k] * b.vectors[j * n + k];
        }
        worst = std::max(worst, std::abs(pa - pb));
      }
    s = e;
  }
  return worst;
}

Outcome oracles() {
  Outcome o;
  std::mt19937_64 rng(33);

  double eig_val = 0.0, eig_vec = 0.0;
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + rng() % 8;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    std::vector<kg::Edge> edges;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b && rng() % 4 == 0) edges.push_back({a, b});
    const auto l = kg::symmetrized_normalized_laplacian(kg::KnowledgeGraph(names, edges));
    const auto mine = symmetric_eigen(l, n);
    const auto ref = testing::dense_eigen(l, n);
    for (std::size_t k = 0; k < n; ++k) eig_val = std::max(eig_val, std::abs(mine.values[k] - ref.values[k]));
    eig_vec = std::max(eig_vec, projector_gap(mine, ref, n));
  }
  o.check(eig_val < 1e-8 && eig_vec < 1e-8, "Laplacian eigenpairs (values " + fmt("%.1e", eig_val) + ", vectors " +
                                                fmt("%.1e", eig_vec) + ")");

  double w1_gap = 0.0;
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t ns = 1 + rng() % 4, nd_ = 1 + rng() % 4;
    const int total = 4 + static_cast<int>(rng() % 5);
    auto margins = [&](std::size_t k) {
      std::vector<int> m(k, 1);
      for (int left = total - static_cast<int>(k); left > 0; --left) ++m[rng() % k];
      return m;
    };
    const auto s = margins(ns), d = margins(nd_);
    std::vector<double> cost(ns * nd_), ps, pd;
    for (double& c : cost) c = u(rng);
    for (int v : s) ps.push_back(static_cast<double>(v) / total);
    for (int v : d) pd.push_back(static_cast<double>(v) / total);
    w1_gap = std::max(w1_gap, std::abs(geo::wasserstein1(ps, pd, cost) -
                                       testing::transport_by_enumeration(s, d, cost) / total));
  }
  o.check(w1_gap < 1e-12, "W1 vs enumeration gap " + fmt("%.1e", w1_gap));

  double r_gap = 0.0;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t len = 3 + rng() % 500;
    std::vector<double> a(len), b(len);
    const double mix = g(rng);
    for (std::size_t t = 0; t < len; ++t) {
      a[t] = 2.0 * g(rng) + 1.0;
      b[t] = mix * a[t] + g(rng);
    }
    r_gap = std::max(r_gap, std::abs(mask::pearson_corr(a, b) - testing::pearson_sums(a, b)));
  }
  o.check(r_gap < 1e-12, "Pearson gap " + fmt("%.1e", r_gap));

  auto pc = [](std::vector<double> x, std::size_t dims) {
    geo::PointCloud p;
    p.dims = dims;
    p.count = x.size() / dims;
    p.x = std::move(x);
    return p;
  };
  const double k3 = geo::ollivier_ricci_curvature(geo::knn_graph(pc({0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2}, 2), 2), 0, 1);
  const double k2 = geo::ollivier_ricci_curvature(geo::knn_graph(pc({0, 1}, 1), 1), 0, 1);
  o.check(std::abs(k3 - 0.5) < 1e-12, "K3 curvature " + fmt("%.15g", k3));
  o.check(std::abs(k2) < 1e-12, "K2 curvature " + fmt("%.15g", k2));
  o.note("eig " + fmt("%.1e", std::max(eig_val, eig_vec)) + ", W1 " + fmt("%.1e", w1_gap) + ", pearson " +
         fmt("%.1e", r_gap) + ", K3 " + fmt("%.3f", k3) + ", K2 " + fmt("%.3f", k2));
  return o;
}

// ---------------------------------------------------------------------------------------------
// 4. masking protocol

const data::SyntheticData& benchmark_data() {
  static const data::SyntheticData sd = data::generate_synthetic_panel(data::GeneratorSpec{}, 7);
  return sd;
}

const train::Experiment& benchmark_experiment() {
  static const train::Experiment ex = train::make_experiment(benchmark_data().panel, benchmark_data().graph, 0.8, 0.125, 32);
  return ex;
}

Outcome masking() {
  Outcome o;
  const train::Experiment& ex = benchmark_experiment();
  const std::size_t n = ex.panel.nodes(), T = ex.panel.steps;
  std::size_t violations = 0, checked = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const std::size_t target = s % n;
    const double rho = 0.3 + 0.1 * static_cast<double>(s % 5);
    const mask::MaskSet ms = mask::sample_blind_spot_mask(ex.panel, ex.fit, target, rho, ex.split.test, 32, s);
    // proxies recomputed here straight from the training-range correlations
    std::set<std::size_t> hidden{target};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == target) continue;
      const double r = testing::pearson_sums(
          std::vector<double>(ex.panel.y.begin() + target * T + ex.fit.begin, ex.panel.y.begin() + target * T + ex.fit.end),
          std::vector<double>(ex.panel.y.begin() + j * T + ex.fit.begin, ex.panel.y.begin() + j * T + ex.fit.end));
      if (std::abs(r) >= rho) hidden.insert(j);
    }
    const bool block_ok = ms.block.size() == 32 && ms.block.begin >= ex.split.test.begin && ms.block.end <= T;
    violations += !block_ok;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < T; ++t) {
        const bool want = ms.block.contains(t) && hidden.count(i);
        violations += ms.m.missing(i, t) != want;
        ++checked;
      }
  }
  o.check(violations == 0, std::to_string(violations) + " cells disagree with the definition");

  data::RawPanel perturbed = benchmark_data().panel;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 25.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = ex.split.test.begin; t < T; ++t) perturbed.values[i * T + t] = g(rng);
  const train::Experiment ex2 = train::make_experiment(perturbed, benchmark_data().graph, 0.8, 0.125, 32);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (double rho : {0.3, 0.4, 0.5, 0.6, 0.7}) changed += ex.proxies(i, rho) != ex2.proxies(i, rho);
  o.check(changed == 0, std::to_string(changed) + " proxy sets changed after perturbing the test split");
  o.note("200 mask sets, " + std::to_string(checked) + " cells checked; leakage: " + std::to_string(changed) +
         " of " + std::to_string(n * 5) + " proxy sets changed");
  return o;
}

// ---------------------------------------------------------------------------------------------
// 5. metric identities

Outcome metric_identities() {
  Outcome o;
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g(0.0, 1.0);
  double snr_gap = 0.0, shift_gap = 0.0, r2_perfect = 0.0, r2_mean = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t len = 2 + rng() % 400;
    std::vector<double> gt(len), pred(len), half(len), mean_pred(len);
    double m = 0.0, ms = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      gt[k] = 3.0 * g(rng) + 0.5;
      pred[k] = gt[k] + 0.7 * g(rng);
      half[k] = gt[k] + 0.5 * (pred[k] - gt[k]);
      m += gt[k] / static_cast<double>(len);
      ms += gt[k] * gt[k] / static_cast<double>(len);
    }
    std::fill(mean_pred.begin(), mean_pred.end(), m);
    const auto reg = metrics::regression_metrics(pred, gt);
    snr_gap = std::max(snr_gap, std::abs(metrics::recovery_snr(pred, gt) - 10.0 * std::log10(ms / reg.mse)));
    shift_gap = std::max(shift_gap, std::abs(metrics::recovery_snr(half, gt) - metrics::recovery_snr(pred, gt) - 6.02));
    r2_perfect = std::max(r2_perfect, std::abs(metrics::regression_metrics(gt, gt).r2 - 1.0));
    r2_mean = std::max(r2_mean, std::abs(metrics::regression_metrics(mean_pred, gt).r2));
  }
  o.check(snr_gap < 1e-9, "SNR/MSE identity gap " + fmt("%.1e", snr_gap));
  o.check(shift_gap < 0.01, "halving shift off by " + fmt("%.4f", shift_gap));
  o.check(r2_perfect == 0.0, "r2 of perfect prediction");
  o.check(r2_mean < 1e-12, "r2 of mean prediction " + fmt("%.1e", r2_mean));
  o.note("snr identity " + fmt("%.1e", snr_gap) + ", halving shift within " + fmt("%.4f dB", shift_gap) +
         " of 6.02, mean-prediction r2 " + fmt("%.1e", r2_mean));
  return o;
}

// ---------------------------------------------------------------------------------------------
// 6. benchmark, 8. sweeps

const std::vector<std::uint64_t> kSeeds{0, 1, 2};

train::TrainConfig benchmark_train_config(std::uint64_t seed) {
  train::TrainConfig tc;
  tc.batch_size = 4;
  tc.base_lr = 3e-3;
  tc.max_epochs = 45;
  tc.seed = seed;
  return tc;
}

struct Trained {
  model::ModelConfig cfg;
  nd::ParamMap params;
};

std::map<std::pair<std::string, std::uint64_t>, Trained>& model_cache() {
  static std::map<std::pair<std::string, std::uint64_t>, Trained> cache;
  return cache;
}

const Trained& trained(const std::string& variant, std::uint64_t seed) {
  auto& cache = model_cache();
  const auto key = std::make_pair(variant, seed);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const train::Experiment& ex = benchmark_experiment();
  Trained t;
  t.cfg.nodes = ex.panel.nodes();
  t.cfg.ablation = model::parse_ablation(variant);
  t.params = train::train(ex, t.cfg, benchmark_train_config(seed)).best_params;
  return cache.emplace(key, std::move(t)).first->second;
}

pipeline::EvalOutput evaluate_model(const Trained& m, std::uint64_t seed, std::vector<double> rhos,
                                    std::vector<double> sigmas, bool with_baselines) {
  const train::Experiment& ex = benchmark_experiment();
  const model::GraphContext graph = model::make_graph_context(ex.graph, m.cfg.d_pe);
  pipeline::EvalSpec spec;
  spec.seeds = {seed};
  spec.rhos = std::move(rhos);
  spec.sigmas = std::move(sigmas);
  spec.block_len = 32;
  spec.target = "all";
  if (with_baselines) spec.baselines = {baselines::Method::Linear, baselines::Method::Spline, baselines::Method::Kalman};
  return pipeline::evaluate(ex, {&m.cfg, &m.params, &graph}, m.cfg.T_seg, spec);
}

double snr_of(const pipeline::EvalOutput& out, const std::string& method, double rho, double sigma) {
  for (const auto& r : out.rows)
    if (r.method == method && r.rho == rho && r.sigma == sigma) return r.snr_db;
  throw rieif::Error("missing row " + method);
}

Outcome benchmark() {
  Outcome o;
  const auto t0 = Clock::now();
  benchmark_experiment();
  const std::vector<std::string> variants{"full", "no-micro", "no-macro", "euclidean-attention"};
  std::map<std::string, double> mean;
  double best_baseline = 0.0;
  std::string per_seed;
  for (const std::string& v : variants) {
    for (std::uint64_t s : kSeeds) {
      const bool full = v == "full";
      const auto out = evaluate_model(trained(v, s), s, {0.4}, {0.0}, full);
      const double snr = snr_of(out, "rieif", 0.4, 0.0);
      mean[v] += snr / static_cast<double>(kSeeds.size());
      per_seed += " " + v + "[" + std::to_string(s) + "]=" + fmt("%.2f", snr);
      if (full) {
        const double b = snr_of(out, "baseline-best", 0.4, 0.0);
        best_baseline += b / static_cast<double>(kSeeds.size());
        per_seed += " baseline-best[" + std::to_string(s) + "]=" + fmt("%.2f", b);
      }
    }
  }
  const double elapsed = seconds_since(t0);
  std::fprintf(stderr, "benchmark per seed:%s\n", per_seed.c_str());
  const double full = mean["full"];
  o.check(full >= best_baseline + 1.0, "full " + fmt("%.2f", full) + " dB vs best baseline " + fmt("%.2f", best_baseline));
  for (const std::string& v : {"no-micro", "no-macro", "euclidean-attention"})
    o.check(full - mean[v] >= 0.2, "full - " + v + " = " + fmt("%.2f dB", full - mean[v]));
  o.check(elapsed < 900.0, "runtime " + fmt("%.0f s", elapsed));
  o.note("mean SNR full " + fmt("%.2f", full) + ", best baseline " + fmt("%.2f", best_baseline) + ", no-micro " +
         fmt("%.2f", mean["no-micro"]) + ", no-macro " + fmt("%.2f", mean["no-macro"]) + ", euclidean " +
         fmt("%.2f", mean["euclidean-attention"]) + " dB; " + fmt("%.0f s", elapsed));
  return o;
}

Outcome sweeps() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::vector<double> rhos{0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<double> sigmas{0.01, 0.05, 0.10, 0.15, 0.20};
  std::vector<double> by_rho(rhos.size(), 0.0), by_sigma(sigmas.size(), 0.0);
  for (std::uint64_t s : kSeeds) {
    const Trained& m = trained("full", s);
    const auto r_out = evaluate_model(m, s, rhos, {0.0}, false);
    const auto s_out = evaluate_model(m, s, {0.4}, sigmas, false);
    for (std::size_t k = 0; k < rhos.size(); ++k) by_rho[k] += snr_of(r_out, "rieif", rhos[k], 0.0) / 3.0;
    for (std::size_t k = 0; k < sigmas.size(); ++k) by_sigma[k] += snr_of(s_out, "rieif", 0.4, sigmas[k]) / 3.0;
  }
  bool finite = true;
  for (double v : by_rho) finite = finite && std::isfinite(v);
  for (double v : by_sigma) finite = finite && std::isfinite(v);
  o.check(finite, "non-finite sweep value");
  const double drop = by_sigma.front() - by_sigma.back();
  o.check(std::abs(drop) <= 6.0, "SNR change from sigma 0.01 to 0.20 is " + fmt("%.2f dB", drop));
  bool monotone = true;
  for (std::size_t k = 1; k < by_sigma.size(); ++k) monotone = monotone && by_sigma[k] <= by_sigma[k - 1] + 0.1;
  std::string rho_s, sig_s;
  for (double v : by_rho) rho_s += (rho_s.empty() ? "" : "/") + fmt("%.2f", v);
  for (double v : by_sigma) sig_s += (sig_s.empty() ? "" : "/") + fmt("%.2f", v);
  o.note("rho 0.3..0.7: " + rho_s + " dB; sigma 0.01..0.20: " + sig_s + " dB (" +
         (monotone ? "non-increasing" : "not monotone") + " within 0.1 dB); " + fmt("%.0f s", seconds_since(t0)));
  return o;
}

// ---------------------------------------------------------------------------------------------
// 7. manifold diagnostics

Outcome manifold() {
  Outcome o;
  geo::PointCloud oct;
  oct.dims = 2;
  oct.count = 8;
  for (int k = 0; k < 8; ++k) {
    oct.x.push_back(std::cos(k * std::numbers::pi / 4));
    oct.x.push_back(std::sin(k * std::numbers::pi / 4));
  }
  const geo::NeighborGraph g = geo::knn_graph(oct, 2);
  const double side = 2.0 * std::sin(std::numbers::pi / 8);
  std::vector<double> w(64, testing::kInf);
  for (int i = 0; i < 8; ++i) {
    w[i * 8 + i] = 0.0;
    w[i * 8 + (i + 1) % 8] = w[((i + 1) % 8) * 8 + i] = side;
  }
  const auto fw = testing::floyd_warshall(w, 8);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = a + 1; b < 8; ++b) pairs.push_back({a, b});
  std::size_t non_adjacent_bad = 0;
  double antipode_gap = 0.0;
  for (const auto& p : geo::graph_geodesics(oct, g, pairs)) {
    const bool adjacent = (p.b - p.a) == 1 || (p.b - p.a) == 7;
    if (!adjacent) non_adjacent_bad += !(p.d_geo > p.d_euc);
    if (p.b - p.a == 4) antipode_gap = std::max(antipode_gap, std::abs(p.d_geo / p.d_euc - fw[p.a * 8 + p.b] / 2.0));
  }
  o.check(non_adjacent_bad == 0, std::to_string(non_adjacent_bad) + " non-adjacent octagon pairs with d_geo <= d_euc");
  o.check(antipode_gap < 1e-9, "antipodal distortion gap " + fmt("%.1e", antipode_gap));

  const auto& raw = benchmark_data().panel;
  const data::StandardizedPanel z = data::zscore_standardize(raw, {0, raw.steps});
  const pipeline::DiagnoseReport r = pipeline::diagnose(z.y, z.nodes(), z.steps, pipeline::DiagnoseSpec{});
  o.check(r.distortion.lower_bound_rate == 1.0,
          "lower bound holds for " + fmt("%.6f", r.distortion.lower_bound_rate) + " of connected pairs");
  o.note("octagon antipode ratio " + fmt("%.4f", fw[4] / 2.0) + "; synthetic panel: " +
         std::to_string(r.distortion.connected) + " connected pairs, lower bound rate " +
         fmt("%.4f", r.distortion.lower_bound_rate) + ", mean distortion " + fmt("%.3f", r.distortion.mean_ratio) +
         ", curvature mean " + fmt("%.3f", r.curvature.mean));
  return o;
}

// ---------------------------------------------------------------------------------------------
// 9. reproducibility through the command-line tool

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility(const fs::path& workdir) {
  Outcome o;
  const fs::path dir = workdir / "cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(RIEIF_CLI_PATH) + " " + args + " >> " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.check(code == 0, "'" + args.substr(0, args.find(' ')) + "' exited with " + std::to_string(code));
    return code == 0;
  };
  const std::string data = (dir / "data").string();
  const std::string in = " --panel " + data + "/panel.csv --kg " + data + "/kg.json";
  if (!run("gen-data --nodes 10 --steps 1200 --seed 5 --out " + data)) return o;
  if (!run("train" + in + " --epochs 3 --batch 8 --seed 2 --out " + (dir / "train").string())) return o;
  const std::string ckpt = " --checkpoint " + (dir / "train" / "checkpoint.json").string();
  if (!run("eval" + in + ckpt + " --seeds 3 --rho 0.3,0.5 --noise 0,0.1 --target all --baseline all --out " +
           (dir / "eval").string()))
    return o;
  if (!run("baseline" + in + " --seeds 2 --out " + (dir / "baseline").string())) return o;
  std::size_t compared = 0;
  for (const char* cmd : {"eval", "baseline"}) {
    const fs::path first = dir / cmd, again = dir / (std::string(cmd) + "-replay");
    if (!run(std::string(cmd) + " --config " + (first / "manifest.json").string() + " --out " + again.string())) return o;
    for (const char* f : {"metrics.csv", "metrics.json"}) {
      const std::string a = slurp(first / f), b = slurp(again / f);
      o.check(!a.empty() && a == b, std::string(cmd) + "/" + f + " differs on replay");
      ++compared;
    }
  }
  o.note(std::to_string(compared) + " metric files byte-identical after replaying their manifests");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  rieif::tune_allocator();
  CLI::App app{"acceptance criteria"};
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for command-line runs");
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradients},
      {2, invariants},
      {3, oracles},
      {4, masking},
      {5, metric_identities},
      {6, benchmark},
      {7, manifold},
      {8, sweeps},
      {9, [&] { return reproducibility(workdir); }},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    failures += !r.pass;
    std::printf("criterion %d: %s %s\n", id, r.pass ? "PASS" : "FAIL", r.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
