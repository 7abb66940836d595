#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rieif/dataio.hpp"
#include "rieif/kgraph.hpp"
#include "rieif/maskproto.hpp"
#include "rieif/model.hpp"

namespace rieif::train {

using model::ModelConfig;
using nd::ParamMap;

struct TrainConfig {
  double lambda_scale = 1.0;
  double lambda_shape = 1.0;
  double base_lr = 1e-3;
  std::size_t max_epochs = 100;
  std::size_t patience = 15;
  std::size_t batch_size = 32;
  double weight_decay = 1e-5;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;

  double train_frac = 0.8;
  double val_frac = 0.125;  // tail of the training range
  std::size_t train_stride = 0;  // 0 = T_seg
  double rho = 0.4;
  std::size_t block_len = 32;
  /// Node names whose blind spots are used for training; empty = every node.
  std::vector<std::string> targets;

  void validate() const;
};

/// lambda_scale * MSE + lambda_shape * (1 - cos(x_hat, x_gt)). Both are [M, 1] or [M].
nd::Var hybrid_loss(const nd::Var& x_hat, const nd::Var& x_gt, double lambda_scale, double lambda_shape,
                    double eps = 1e-8);
double hybrid_loss_value(std::span<const double> x_hat, std::span<const double> x_gt, double lambda_scale,
                         double lambda_shape, double eps = 1e-8);

/// Standardised panel, split and correlation-derived proxy sets shared by training,
/// evaluation and baselines.
struct Experiment {
  data::RawPanel raw;
  data::StandardizedPanel panel;
  kg::KnowledgeGraph graph;  // node order matches the panel
  data::Split split;
  data::TimeRange fit;   // training portion incl. validation; statistics come from here
  data::TimeRange train;  // fit minus the validation tail
  data::TimeRange val;
  std::vector<double> corr;  // N x N on `fit`

  std::vector<std::size_t> proxies(std::size_t target, double rho) const;
};

Experiment make_experiment(data::RawPanel raw, const kg::KnowledgeGraph& graph, double train_frac, double val_frac,
                           std::size_t min_length);

/// Blind-spot mask inside one segment with the block placed uniformly, deterministic in `seed`.
model::SegmentMask segment_blind_spot(const Experiment& ex, const data::Segment& seg, std::size_t target, double rho,
                                      std::size_t block_len, std::uint64_t seed);

/// Supervised rows of a batch in stacked (t, b, i) order: the hidden cells that are not
/// raw-missing, with their ground truth.
struct Supervision {
  std::vector<std::size_t> rows;
  std::vector<double> truth;
  std::vector<std::size_t> per_segment;  // count of rows contributed by each batch entry
};
Supervision supervision_rows(const Experiment& ex, const std::vector<model::SegmentMask>& batch,
                             const ModelConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ParamMap best_params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
  bool early_stopped = false;
};

/// Fits the model. Throws DivergenceError on a non-finite loss.
TrainResult train(const Experiment& ex, const ModelConfig& cfg, const TrainConfig& tc);

/// Loss on a fixed list of masked segments (batched), pooled over the batch.
double masked_loss(const Experiment& ex, const ParamMap& params, const model::GraphContext& graph,
                   const ModelConfig& cfg, const std::vector<model::SegmentMask>& masks, const TrainConfig& tc);

struct Prediction {
  std::size_t node = 0;
  std::size_t t = 0;
  double value = 0.0;  // z-scored
};

/// Model estimates at exactly the hidden cells of each masked segment, in segment order.
std::vector<std::vector<Prediction>> predict_masked(const Experiment& ex, const ParamMap& params,
                                                    const model::GraphContext& graph, const ModelConfig& cfg,
                                                    const std::vector<model::SegmentMask>& masks,
                                                    const std::vector<double>* noisy = nullptr,
                                                    std::size_t batch_size = 32);

std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace rieif::train
