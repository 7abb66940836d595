#include "rieif/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rieif/error.hpp"
#include "rieif/rng.hpp"

namespace rieif::train {

using namespace rieif::nd;

void TrainConfig::validate() const {
  if (lambda_scale < 0.0 || lambda_shape < 0.0 || !(lambda_scale + lambda_shape > 0.0)) {
    throw ConfigError("train config: lambdas must be >= 0 with a positive sum");
  }
  if (!(base_lr > 0.0)) throw ConfigError("train config: base_lr must be > 0");
  if (max_epochs < 1) throw ConfigError("train config: max_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
  if (weight_decay < 0.0) throw ConfigError("train config: weight_decay must be >= 0");
  if (!(clip_norm > 0.0)) throw ConfigError("train config: clip_norm must be > 0");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train config: train_frac must lie in (0, 1)");
  if (!(val_frac > 0.0 && val_frac < 1.0)) throw ConfigError("train config: val_frac must lie in (0, 1)");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("train config: rho must lie in (0, 1]");
  if (block_len < 1) throw ConfigError("train config: block_len must be >= 1");
}

Var hybrid_loss(const Var& x_hat, const Var& x_gt, double lambda_scale, double lambda_shape, double eps) {
  if (x_hat.shape() != x_gt.shape()) {
    throw ShapeError("hybrid_loss: prediction " + shape_str(x_hat.shape()) + " vs target " + shape_str(x_gt.shape()));
  }
  if (x_hat.value().size() == 0) throw ConfigError("hybrid_loss: empty target index set");
  const Var mse = mean(square(sub(x_hat, x_gt)));
  const Var dot = sum(mul(x_hat, x_gt));
  const Var norms = mul(sqrt(sum(square(x_hat))), sqrt(sum(square(x_gt))));
  const Var cos = div(dot, norms, eps);
  return add(scale(mse, lambda_scale), add_scalar(scale(cos, -lambda_shape), lambda_shape));
}

double hybrid_loss_value(std::span<const double> x_hat, std::span<const double> x_gt, double lambda_scale,
                         double lambda_shape, double eps) {
  if (x_hat.size() != x_gt.size()) throw ShapeError("hybrid_loss: length mismatch");
  if (x_hat.empty()) throw ConfigError("hybrid_loss: empty target index set");
  double se = 0.0, dot = 0.0, a2 = 0.0, b2 = 0.0;
  for (std::size_t k = 0; k < x_hat.size(); ++k) {
    se += (x_hat[k] - x_gt[k]) * (x_hat[k] - x_gt[k]);
    dot += x_hat[k] * x_gt[k];
    a2 += x_hat[k] * x_hat[k];
    b2 += x_gt[k] * x_gt[k];
  }
  const double cos = dot / (std::sqrt(a2) * std::sqrt(b2) + eps);
  return lambda_scale * se / static_cast<double>(x_hat.size()) + lambda_shape * (1.0 - cos);
}

std::vector<std::size_t> Experiment::proxies(std::size_t target, double rho) const {
  const std::size_t n = panel.nodes();
  if (target >= n) throw ConfigError("proxies: target index out of range");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j)
    if (j != target && std::abs(corr[target * n + j]) >= rho) out.push_back(j);
  return out;
}

Experiment make_experiment(data::RawPanel raw, const kg::KnowledgeGraph& graph, double train_frac, double val_frac,
                           std::size_t min_length) {
  raw.validate();
  Experiment ex;
  ex.split = data::chronological_split(raw.steps, train_frac, min_length);
  ex.fit = ex.split.train;
  const auto val_len = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(ex.fit.size())));
  ex.val = {ex.fit.end - val_len, ex.fit.end};
  ex.train = {ex.fit.begin, ex.val.begin};
  if (ex.val.size() < min_length || ex.train.size() < min_length) {
    throw ConfigError("experiment: training range of " + std::to_string(ex.fit.size()) +
                      " steps is too short for a validation tail and a training part of " +
                      std::to_string(min_length) + " steps each");
  }
  ex.panel = data::zscore_standardize(raw, ex.fit);
  ex.corr = mask::correlation_matrix(ex.panel, ex.fit);
  ex.graph = graph.reordered(raw.node_names);
  ex.raw = std::move(raw);
  return ex;
}

model::SegmentMask segment_blind_spot(const Experiment& ex, const data::Segment& seg, std::size_t target, double rho,
                                      std::size_t block_len, std::uint64_t seed) {
  const mask::MaskSet ms = mask::sample_blind_spot_mask(ex.panel.nodes(), ex.panel.steps, target,
                                                        ex.proxies(target, rho), rho, seg.range(), block_len, seed);
  return {seg, ms.masked_nodes(), ms.block};
}

Supervision supervision_rows(const Experiment& ex, const std::vector<model::SegmentMask>& batch,
                             const ModelConfig& cfg) {
  Supervision s;
  const std::size_t B = batch.size(), n = cfg.nodes;
  s.per_segment.assign(B, 0);
  // (t, b, i) order keeps rows ascending
  for (std::size_t k = 0; k < cfg.T_seg; ++k) {
    for (std::size_t b = 0; b < B; ++b) {
      const auto& sm = batch[b];
      const std::size_t t = sm.segment.start + k;
      if (!sm.block.contains(t)) continue;
      for (std::size_t i : sm.nodes) {
        if (ex.panel.raw_missing.missing(i, t)) continue;
        s.rows.push_back(model::row_index(k, b, i, B, n));
        s.truth.push_back(ex.panel.at(i, t));
        ++s.per_segment[b];
      }
    }
  }
  return s;
}

namespace {

struct BatchLoss {
  double loss = 0.0;
  std::size_t rows = 0;
};

std::vector<std::size_t> resolve_targets(const Experiment& ex, const TrainConfig& tc) {
  std::vector<std::size_t> out;
  if (tc.targets.empty()) {
    for (std::size_t i = 0; i < ex.panel.nodes(); ++i) out.push_back(i);
  } else {
    for (const auto& name : tc.targets) out.push_back(ex.panel.node_index(name));
  }
  return out;
}

}  // namespace

double masked_loss(const Experiment& ex, const ParamMap& params, const model::GraphContext& graph,
                   const ModelConfig& cfg, const std::vector<model::SegmentMask>& masks, const TrainConfig& tc) {
  double acc = 0.0;
  std::size_t rows = 0;
  for (std::size_t off = 0; off < masks.size(); off += tc.batch_size) {
    const std::vector<model::SegmentMask> batch(masks.begin() + static_cast<std::ptrdiff_t>(off),
                                                masks.begin() + static_cast<std::ptrdiff_t>(std::min(masks.size(), off + tc.batch_size)));
    const Supervision sup = supervision_rows(ex, batch, cfg);
    if (sup.rows.empty()) continue;
    const Array x = model::build_inputs(ex.panel, batch, cfg);
    const std::vector<double> all = model::predict_all(params, x, batch.size(), graph, cfg);
    std::vector<double> pred;
    pred.reserve(sup.rows.size());
    for (std::size_t r : sup.rows) pred.push_back(all[r]);
    acc += hybrid_loss_value(pred, sup.truth, tc.lambda_scale, tc.lambda_shape) * static_cast<double>(sup.rows.size());
    rows += sup.rows.size();
  }
  if (rows == 0) throw ConfigError("masked_loss: no supervised cells");
  return acc / static_cast<double>(rows);
}

TrainResult train(const Experiment& ex, const ModelConfig& cfg, const TrainConfig& tc) {
  cfg.validate();
  tc.validate();
  if (cfg.nodes != ex.panel.nodes()) {
    throw ConfigError("train: model expects N=" + std::to_string(cfg.nodes) + " but the panel has " +
                      std::to_string(ex.panel.nodes()));
  }
  if (tc.block_len > cfg.T_seg) throw ConfigError("train: block_len exceeds T_seg");
  const std::size_t stride = tc.train_stride ? tc.train_stride : cfg.T_seg;
  const auto train_segs = data::make_segments(ex.train, cfg.T_seg, stride);
  const auto val_segs = data::make_segments(ex.val, cfg.T_seg, cfg.T_seg);
  if (train_segs.empty() || val_segs.empty()) throw ConfigError("train: need at least one training and one validation segment");
  const auto targets = resolve_targets(ex, tc);
  const model::GraphContext graph = model::make_graph_context(ex.graph, cfg.d_pe);

  auto mask_for = [&](const data::Segment& seg, std::uint64_t seed) {
    const std::size_t target = targets[static_cast<std::size_t>(mix64(seed) % targets.size())];
    return segment_blind_spot(ex, seg, target, tc.rho, tc.block_len, seed);
  };
  std::vector<model::SegmentMask> val_masks;
  for (std::size_t k = 0; k < val_segs.size(); ++k) val_masks.push_back(mask_for(val_segs[k], derive_seed(tc.seed, "val-mask", k)));

  TrainResult res;
  ParamMap params = model::init_params(cfg, derive_seed(tc.seed, "init"));
  nd::AdamW opt({tc.base_lr, tc.weight_decay, 0.9, 0.999, 1e-8});
  res.best_params = params;
  res.best_val = std::numeric_limits<double>::infinity();
  std::size_t wait = 0;

  std::vector<std::size_t> order(train_segs.size());
  for (std::size_t epoch = 0; epoch < tc.max_epochs; ++epoch) {
    const double lr = nd::cosine_lr(tc.base_lr, static_cast<int>(epoch), static_cast<int>(tc.max_epochs));
    opt.set_learning_rate(lr);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    Rng rng = make_rng(tc.seed, "shuffle", epoch);
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[static_cast<std::size_t>(rng() % k)]);

    double loss_acc = 0.0;
    std::size_t loss_rows = 0;
    for (std::size_t off = 0; off < order.size(); off += tc.batch_size) {
      std::vector<model::SegmentMask> batch;
      for (std::size_t k = off; k < std::min(order.size(), off + tc.batch_size); ++k) {
        batch.push_back(mask_for(train_segs[order[k]], derive_seed(tc.seed, "train-mask", epoch, order[k])));
      }
      const Supervision sup = supervision_rows(ex, batch, cfg);
      if (sup.rows.empty()) continue;
      const Array x = model::build_inputs(ex.panel, batch, cfg);
      const Array gt({sup.rows.size(), 1}, sup.truth);
      const std::size_t B = batch.size();
      const nd::Program program = [&](Tape& tape, const VarMap& vars) {
        const Var xh = model::forward(tape, vars, x, B, graph, cfg, &sup.rows);
        return hybrid_loss(xh, tape.constant(gt), tc.lambda_scale, tc.lambda_shape);
      };
      GradResult g = nd::evaluate_with_gradients(program, params);
      if (!std::isfinite(g.loss)) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", batch " << off / tc.batch_size << " (loss " << g.loss
            << ", lr " << lr << ", parameter norm " << nd::global_norm(params) << ")";
        throw DivergenceError(msg.str());
      }
      nd::clip_grad_norm(g.grads, tc.clip_norm);
      opt.step(params, g.grads);
      loss_acc += g.loss * static_cast<double>(sup.rows.size());
      loss_rows += sup.rows.size();
    }
    const double val = masked_loss(ex, params, graph, cfg, val_masks, tc);
    if (!std::isfinite(val)) throw DivergenceError("validation loss is not finite at epoch " + std::to_string(epoch));
    res.history.push_back({epoch, loss_rows ? loss_acc / static_cast<double>(loss_rows) : 0.0, val, lr});
    if (val < res.best_val) {
      res.best_val = val;
      res.best_params = params;
      res.best_epoch = epoch;
      wait = 0;
    } else if (++wait >= tc.patience) {
      res.early_stopped = true;
      break;
    }
  }
  return res;
}

std::vector<std::vector<Prediction>> predict_masked(const Experiment& ex, const ParamMap& params,
                                                    const model::GraphContext& graph, const ModelConfig& cfg,
                                                    const std::vector<model::SegmentMask>& masks,
                                                    const std::vector<double>* noisy, std::size_t batch_size) {
  model::check_params(cfg, params);
  std::vector<std::vector<Prediction>> out(masks.size());
  for (std::size_t off = 0; off < masks.size(); off += batch_size) {
    const std::size_t end = std::min(masks.size(), off + batch_size);
    const std::vector<model::SegmentMask> batch(masks.begin() + static_cast<std::ptrdiff_t>(off),
                                                masks.begin() + static_cast<std::ptrdiff_t>(end));
    const Array x = model::build_inputs(ex.panel, batch, cfg, noisy);
    const std::vector<double> all = model::predict_all(params, x, batch.size(), graph, cfg);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const auto& sm = batch[b];
      for (std::size_t i : sm.nodes) {
        for (std::size_t t = sm.block.begin; t < sm.block.end; ++t) {
          if (ex.panel.raw_missing.missing(i, t)) continue;
          const std::size_t k = t - sm.segment.start;
          out[off + b].push_back({i, t, all[model::row_index(k, b, i, batch.size(), cfg.nodes)]});
        }
      }
    }
  }
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string s = "epoch,train_loss,val_loss,lr\n";
  for (const auto& h : history) {
    s += std::to_string(h.epoch) + "," + data::format_double(h.train_loss) + "," + data::format_double(h.val_loss) +
         "," + data::format_double(h.lr) + "\n";
  }
  return s;
}

}  // namespace rieif::train
