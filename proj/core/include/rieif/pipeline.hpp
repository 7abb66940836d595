#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rieif/baselines.hpp"
#include "rieif/geodiag.hpp"
#include "rieif/metrics.hpp"
#include "rieif/train.hpp"

namespace rieif::pipeline {

/// Masked evaluation over the test split: one blind spot per test segment, repeated for
/// every (seed, rho, sigma).
struct EvalSpec {
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<double> rhos{0.4};
  std::vector<double> sigmas{0.0};
  std::size_t block_len = 32;
  /// Node name; "all" draws a target per test segment from the "target" stream of the seed;
  /// empty picks the node with the most proxies at rhos.front().
  std::string target;
  std::string method = "rieif";
  std::string dataset = "synthetic";
  std::vector<baselines::Method> baselines;
  baselines::KalmanParams kalman;
  bool raw_units = false;
  bool include_model = true;

  void validate() const;
};

/// Node with the largest proxy set at `rho`, lowest index on ties.
std::size_t default_target(const train::Experiment& ex, double rho);

inline constexpr std::size_t kRotateTarget = static_cast<std::size_t>(-1);

/// Blind spots for the test segments of length T_seg. Block position and (with
/// kRotateTarget) target depend on the seed and segment only, so they are shared across
/// rho and sigma.
std::vector<model::SegmentMask> test_masks(const train::Experiment& ex, std::size_t t_seg, std::size_t target,
                                           double rho, std::size_t block_len, std::uint64_t seed);

/// panel.y plus N(0, sigma^2) noise drawn from the "noise" stream of `seed`.
std::vector<double> awgn_copy(const data::StandardizedPanel& panel, double sigma, std::uint64_t seed);

/// Baseline estimates at the hidden cells, in the same order predict_masked uses. Each
/// hidden node is recovered from its own full series with only the block removed.
std::vector<std::vector<train::Prediction>> baseline_predict(const train::Experiment& ex,
                                                             const std::vector<model::SegmentMask>& masks,
                                                             const baselines::BaselineSpec& spec,
                                                             const std::vector<double>& inputs, bool* fell_back = nullptr);

struct ModelHandle {
  const model::ModelConfig* cfg = nullptr;
  const nd::ParamMap* params = nullptr;
  const model::GraphContext* graph = nullptr;
};

struct EvalOutput {
  std::vector<metrics::MetricReport> rows;
  std::vector<metrics::MetricReport> means;
};

/// `model` may be left empty when spec.include_model is false. With more than one baseline
/// a "baseline-best" row (highest SNR per seed, rho and sigma) is added.
EvalOutput evaluate(const train::Experiment& ex, const ModelHandle& model, std::size_t t_seg, const EvalSpec& spec);

struct DiagnoseSpec {
  std::size_t k_nn = 15;
  std::size_t max_samples = 2000;
  std::size_t pairs = 10000;
  std::size_t max_edges = 2000;
  std::size_t bins = 20;
  std::uint64_t seed = 0;
};

struct DiagnoseReport {
  std::size_t samples = 0;
  std::size_t edges = 0;
  geo::Distortion distortion;
  geo::CurvatureSummary curvature;
  bool disconnected = false;
};

/// Distortion and curvature of the snapshot cloud of a z-scored N x T panel.
DiagnoseReport diagnose(const std::vector<double>& y, std::size_t nodes, std::size_t steps, const DiagnoseSpec& spec);
std::string diagnose_json(const DiagnoseReport& r, const DiagnoseSpec& spec);
/// One row per evaluated edge: index, kappa.
std::string curvature_csv(const DiagnoseReport& r);

/// FNV-1a of the bytes, as 16 hex digits.
std::string hash_hex(const std::string& bytes);
std::string file_hash(const std::filesystem::path& path);

}  // namespace rieif::pipeline
