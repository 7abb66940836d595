#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rieif/dataio.hpp"
#include "rieif/kgraph.hpp"
#include "rieif/ndgrad.hpp"

namespace rieif::model {

using nd::Array;
using nd::ParamMap;
using nd::Tape;
using nd::Var;
using nd::VarMap;

struct Ablation {
  bool euclidean_attention = false;
  bool no_macro = false;
  bool no_micro = false;
  bool fixed_gate = false;
  bool node_wise_projection = false;
  bool operator==(const Ablation&) const = default;
};

/// Parses a comma-separated list such as "no-macro,fixed-gate-0.5"; "none" or "" is the full model.
Ablation parse_ablation(const std::string& list);
std::string ablation_name(const Ablation& a);

struct ModelConfig {
  std::size_t nodes = 34;
  std::size_t K = 5;
  std::size_t tau = 1;
  std::size_t D = 32;
  std::size_t H = 8;
  std::size_t L = 2;
  std::size_t d_pe = 16;
  std::size_t T_seg = 32;
  double epsilon = 1e-8;
  bool head_merge = true;  // D x D output projection after the heads
  Ablation ablation;

  std::size_t d_k() const { return D / H; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Everything the model needs from the graph, precomputed once.
struct GraphContext {
  Array pe;  // [N, d_pe]
  std::shared_ptr<const nd::SoftmaxMask> mask;
};

GraphContext make_graph_context(const kg::KnowledgeGraph& kg, std::size_t d_pe);

/// Weight matrices uniform(+-1/sqrt(fan_in)), biases 0, LSTM forget bias 1, W_O identity.
ParamMap init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Throws ConfigError when names or shapes disagree with `cfg`.
void check_params(const ModelConfig& cfg, const ParamMap& params);

// Building blocks. Rows are stacked snapshots: G groups of N node rows each.

/// Softplus(X W_in + b_in).
Var lift_nodes(const Var& x, const VarMap& p);
/// h / (||h|| + eps) per row.
Var spherical_normalize(const Var& h, double eps);
/// 2 arccos(clamp(<a, b>, -1, 1)).
double fisher_rao_distance(std::span<const double> z_a, std::span<const double> z_b);

struct LstmCarry {
  Var h;
  Var c;
};

/// One LSTM step on a [batch, D] input. A carry with invalid Vars is the zero state.
LstmCarry lstm_cell(const Var& input, const LstmCarry& carry, const VarMap& p, std::size_t D);

/// Softplus(Flatten(X_t) W_glob + b_glob) followed by the LSTM cell, for one time step
/// of `batch` snapshots ([batch*N, K] rows). Returns u_macro [batch, D].
LstmCarry macro_stream_step(const Var& x_t, const LstmCarry& carry, const VarMap& p, const ModelConfig& cfg,
                            std::size_t batch);

struct MicroOutput {
  Var u;  // tangent update, [G*N, D]
  Var h;  // Softplus(H_in + U)
  Array attention;  // [G*H, N, N], only when requested
};

/// One KG-masked attention layer over G groups of N rows.
MicroOutput micro_stream_layer(const Var& h_in, const GraphContext& graph, const VarMap& p, std::size_t layer,
                               const ModelConfig& cfg, std::size_t groups, bool need_h = true,
                               bool keep_attention = false);

struct Fused {
  Var gate;  // invalid when no gate is learned
  Var u_total;
};

/// Channel-wise convex combination of micro and (row-aligned) macro updates.
Fused geometric_gate_fuse(const Var& u_micro, const Var& u_macro, const VarMap& p, const ModelConfig& cfg);

/// Softplus(H0 + U).
Var retract(const Var& h0, const Var& u);
/// H_hat W_out + b_out, [rows, 1].
Var readout(const Var& h_hat, const VarMap& p);

/// Plain-value copies of the intermediate states, rows ordered (t, b, i).
struct ForwardTrace {
  Array h0, z, u_macro, u_micro, gate, h_hat, x_hat;
  std::vector<Array> attention;  // per layer, [G*H, N, N]
  std::vector<Array> h_layers;   // retracted output of each micro layer
};

/// Full forward over `batch` segments of T_seg steps. `x` is [T_seg*batch*N, K] with rows
/// ordered (t, b, i). When `rows` is given only those rows are read out (the returned
/// Var is [rows.size(), 1]); otherwise every row is.
Var forward(Tape& tape, const VarMap& p, const Array& x, std::size_t batch, const GraphContext& graph,
            const ModelConfig& cfg, const std::vector<std::size_t>* rows = nullptr, ForwardTrace* trace = nullptr);

/// Forward pass outside any training tape. Returns x_hat laid out [T_seg][batch][N].
std::vector<double> predict_all(const ParamMap& params, const Array& x, std::size_t batch, const GraphContext& graph,
                                const ModelConfig& cfg, ForwardTrace* trace = nullptr);

/// Cells hidden from the model within one segment: `nodes` over `block`.
struct SegmentMask {
  data::Segment segment;
  std::vector<std::size_t> nodes;
  data::TimeRange block;

  bool hides(std::size_t i, std::size_t t) const;
};

/// Stacked delay embeddings [T_seg*batch*N, K] for a batch of masked segments. Lags may
/// reach before a segment's start; only that segment's own mask applies. `noisy` (same
/// layout as panel.y), when given, replaces the observed values fed to the model.
Array build_inputs(const data::StandardizedPanel& panel, const std::vector<SegmentMask>& batch,
                   const ModelConfig& cfg, const std::vector<double>* noisy = nullptr);

/// Row index of (t, b, i) in the stacked layout.
inline std::size_t row_index(std::size_t t, std::size_t b, std::size_t i, std::size_t batch, std::size_t nodes) {
  return (t * batch + b) * nodes + i;
}

// Checkpoints: JSON with a version, the config and every parameter's shape and data.
inline constexpr int kCheckpointVersion = 1;
std::string checkpoint_to_json(const ModelConfig& cfg, const ParamMap& params);
std::pair<ModelConfig, ParamMap> checkpoint_from_json(const std::string& text);
void save_checkpoint(const ModelConfig& cfg, const ParamMap& params, const std::filesystem::path& path);
std::pair<ModelConfig, ParamMap> load_checkpoint(const std::filesystem::path& path);

}  // namespace rieif::model
