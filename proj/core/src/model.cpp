#include "rieif/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rieif/error.hpp"
#include "rieif/rng.hpp"

namespace rieif::model {

using namespace rieif::nd;

namespace {

const Var& param(const VarMap& p, const std::string& name) {
  auto it = p.find(name);
  if (it == p.end()) throw ConfigError("model: missing parameter '" + name + "'");
  return it->second;
}

std::string layer_key(std::size_t layer, const char* what) { return "micro" + std::to_string(layer) + "." + what; }

bool has_gate(const ModelConfig& cfg) {
  const Ablation& a = cfg.ablation;
  return !a.no_macro && !a.no_micro && !a.fixed_gate;
}

// Name -> shape of every parameter the configuration uses.
std::vector<std::pair<std::string, Shape>> param_shapes(const ModelConfig& cfg) {
  const std::size_t D = cfg.D;
  std::vector<std::pair<std::string, Shape>> s;
  s.push_back({"lift.w", {cfg.K, D}});
  s.push_back({"lift.b", {D}});
  if (!cfg.ablation.no_macro) {
    const std::size_t in = cfg.ablation.node_wise_projection ? cfg.K : cfg.nodes * cfg.K;
    s.push_back({"glob.w", {in, D}});
    s.push_back({"glob.b", {D}});
    s.push_back({"lstm.w_ih", {D, 4 * D}});
    s.push_back({"lstm.w_hh", {D, 4 * D}});
    s.push_back({"lstm.b", {4 * D}});
  }
  if (!cfg.ablation.no_micro) {
    for (std::size_t l = 0; l < cfg.L; ++l) {
      s.push_back({layer_key(l, "wq"), {D, D}});
      s.push_back({layer_key(l, "wk"), {D, D}});
      s.push_back({layer_key(l, "wv"), {D, D}});
      s.push_back({layer_key(l, "wq_pe"), {cfg.d_pe, D}});
      s.push_back({layer_key(l, "wk_pe"), {cfg.d_pe, D}});
      if (cfg.head_merge) s.push_back({layer_key(l, "wo"), {D, D}});
    }
  }
  if (has_gate(cfg)) {
    s.push_back({"gate.w1", {2 * D, D}});
    s.push_back({"gate.b1", {D}});
    s.push_back({"gate.w2", {D, D}});
    s.push_back({"gate.b2", {D}});
  }
  s.push_back({"out.w", {D, 1}});
  s.push_back({"out.b", {1}});
  return s;
}

}  // namespace

Ablation parse_ablation(const std::string& list) {
  Ablation a;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item == "none" || item == "full") continue;
    if (item == "euclidean-attention") a.euclidean_attention = true;
    else if (item == "no-macro") a.no_macro = true;
    else if (item == "no-micro") a.no_micro = true;
    else if (item == "fixed-gate-0.5" || item == "fixed-gate") a.fixed_gate = true;
    else if (item == "node-wise-projection") a.node_wise_projection = true;
    else throw ConfigError("unknown ablation '" + item + "'");
  }
  return a;
}

std::string ablation_name(const Ablation& a) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(a.euclidean_attention, "euclidean-attention");
  add(a.no_macro, "no-macro");
  add(a.no_micro, "no-micro");
  add(a.fixed_gate, "fixed-gate-0.5");
  add(a.node_wise_projection, "node-wise-projection");
  return out.empty() ? "full" : out;
}

void ModelConfig::validate() const {
  if (nodes < 1 || K < 1 || tau < 1 || D < 1 || H < 1 || L < 1 || d_pe < 1 || T_seg < 1) {
    throw ConfigError("model config: all dimensions must be >= 1");
  }
  if (D % H != 0) {
    throw ConfigError("model config: D=" + std::to_string(D) + " is not divisible by H=" + std::to_string(H));
  }
  if (!(epsilon > 0.0)) throw ConfigError("model config: epsilon must be > 0");
}

GraphContext make_graph_context(const kg::KnowledgeGraph& kg, std::size_t d_pe) {
  const std::size_t n = kg.size();
  const kg::LapPE pe = kg::laplacian_positional_encoding(kg, d_pe);
  GraphContext g;
  g.pe = Array({n, d_pe}, pe.e);
  auto mask = std::make_shared<SoftmaxMask>();
  mask->rows = n;
  mask->cols = n;
  mask->allowed = kg::attention_mask_matrix(kg, true);
  g.mask = std::move(mask);
  return g;
}

ParamMap init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, "init");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  ParamMap p;
  for (const auto& [name, shape] : param_shapes(cfg)) {
    Array a(shape, 0.0);
    if (shape.size() == 2) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(shape[0]));
      for (double& v : a.storage()) v = bound * unif(rng);
    }
    p.emplace(name, std::move(a));
  }
  if (!cfg.ablation.no_macro) {
    Array& b = p.at("lstm.b");
    for (std::size_t k = cfg.D; k < 2 * cfg.D; ++k) b[k] = 1.0;
  }
  if (!cfg.ablation.no_micro && cfg.head_merge) {
    for (std::size_t l = 0; l < cfg.L; ++l) {
      Array& wo = p.at(layer_key(l, "wo"));
      wo.fill(0.0);
      for (std::size_t d = 0; d < cfg.D; ++d) wo.at(d, d) = 1.0;
    }
  }
  return p;
}

void check_params(const ModelConfig& cfg, const ParamMap& params) {
  cfg.validate();
  const auto shapes = param_shapes(cfg);
  for (const auto& [name, shape] : shapes) {
    auto it = params.find(name);
    if (it == params.end()) throw ConfigError("parameters: '" + name + "' missing for this configuration");
    if (it->second.shape() != shape) {
      throw ShapeError("parameters: '" + name + "' has shape " + shape_str(it->second.shape()) + ", expected " +
                       shape_str(shape));
    }
  }
  if (params.size() != shapes.size()) throw ConfigError("parameters: unexpected extra entries for this configuration");
}

Var lift_nodes(const Var& x, const VarMap& p) { return softplus(add(matmul(x, param(p, "lift.w")), param(p, "lift.b"))); }

Var spherical_normalize(const Var& h, double eps) { return l2_normalize(h, eps); }

double fisher_rao_distance(std::span<const double> z_a, std::span<const double> z_b) {
  if (z_a.size() != z_b.size()) throw ShapeError("fisher_rao_distance: length mismatch");
  double dot = 0.0;
  for (std::size_t k = 0; k < z_a.size(); ++k) dot += z_a[k] * z_b[k];
  return 2.0 * std::acos(std::clamp(dot, -1.0, 1.0));
}

namespace {

LstmCarry lstm_from_gates(Var gates, const LstmCarry& carry, const VarMap& p, std::size_t D) {
  if (carry.h.valid()) gates = add(gates, matmul(carry.h, param(p, "lstm.w_hh")));
  const Var i = sigmoid(slice(gates, 1, 0, D));
  const Var f = sigmoid(slice(gates, 1, D, 2 * D));
  const Var g = tanh(slice(gates, 1, 2 * D, 3 * D));
  const Var o = sigmoid(slice(gates, 1, 3 * D, 4 * D));
  Var c = mul(i, g);
  if (carry.c.valid()) c = add(mul(f, carry.c), c);
  return {mul(o, tanh(c)), c};
}

Var macro_projection(const Var& x, const VarMap& p, const ModelConfig& cfg, std::size_t groups) {
  const Var in = cfg.ablation.node_wise_projection ? x : reshape(x, {groups, cfg.nodes * cfg.K});
  return softplus(add(matmul(in, param(p, "glob.w")), param(p, "glob.b")));
}

}  // namespace

LstmCarry lstm_cell(const Var& input, const LstmCarry& carry, const VarMap& p, std::size_t D) {
  const Var gates = add(matmul(input, param(p, "lstm.w_ih")), param(p, "lstm.b"));
  return lstm_from_gates(gates, carry, p, D);
}

LstmCarry macro_stream_step(const Var& x_t, const LstmCarry& carry, const VarMap& p, const ModelConfig& cfg,
                            std::size_t batch) {
  return lstm_cell(macro_projection(x_t, p, cfg, batch), carry, p, cfg.D);
}

MicroOutput micro_stream_layer(const Var& h_in, const GraphContext& graph, const VarMap& p, std::size_t layer,
                               const ModelConfig& cfg, std::size_t groups, bool need_h, bool keep_attention) {
  Tape& tape = h_in.tape();
  const std::size_t n = cfg.nodes, D = cfg.D, H = cfg.H, dk = cfg.d_k();
  const bool euclid = cfg.ablation.euclidean_attention;
  const Var pe = tape.constant(graph.pe);

  const Var src = euclid ? h_in : spherical_normalize(h_in, cfg.epsilon);
  auto project = [&](const char* w, const char* w_pe) {  // [G*N, D], heads side by side
    const Var base = reshape(matmul(src, param(p, layer_key(layer, w))), {groups, n, D});
    const Var pos = matmul(pe, param(p, layer_key(layer, w_pe)));  // [N, D], tiled over groups
    const Var q = add(base, pos);
    if (euclid) return reshape(q, {groups * n, D});
    return reshape(l2_normalize(reshape(q, {groups * n * H, dk}), cfg.epsilon), {groups * n, D});
  };
  const Var q = project("wq", "wq_pe");
  const Var k = project("wk", "wk_pe");
  const Var v = matmul(h_in, param(p, layer_key(layer, "wv")));

  MicroOutput out;
  Var merged = masked_attention(q, k, v, n, H, 1.0 / std::sqrt(static_cast<double>(dk)), graph.mask,
                                keep_attention ? &out.attention : nullptr);
  if (cfg.head_merge) merged = matmul(merged, param(p, layer_key(layer, "wo")));
  out.u = merged;
  if (need_h) out.h = softplus(add(h_in, merged));
  return out;
}

Fused geometric_gate_fuse(const Var& u_micro, const Var& u_macro, const VarMap& p, const ModelConfig& cfg) {
  Fused f;
  if (cfg.ablation.fixed_gate) {
    f.u_total = scale(add(u_micro, u_macro), 0.5);
    return f;
  }
  const Var both[] = {u_micro, u_macro};
  const Var hidden = softplus(add(matmul(concat(both, 1), param(p, "gate.w1")), param(p, "gate.b1")));
  f.gate = sigmoid(add(matmul(hidden, param(p, "gate.w2")), param(p, "gate.b2")));
  // g*u_mic + (1-g)*u_mac
  f.u_total = add(u_macro, mul(f.gate, sub(u_micro, u_macro)));
  return f;
}

Var retract(const Var& h0, const Var& u) { return softplus(add(h0, u)); }

Var readout(const Var& h_hat, const VarMap& p) { return add(matmul(h_hat, param(p, "out.w")), param(p, "out.b")); }

Var forward(Tape& tape, const VarMap& p, const Array& x_in, std::size_t batch, const GraphContext& graph,
            const ModelConfig& cfg, const std::vector<std::size_t>* rows, ForwardTrace* trace) {
  const std::size_t n = cfg.nodes, T = cfg.T_seg, groups = T * batch;
  if (x_in.rank() != 2 || x_in.dim(0) != groups * n || x_in.dim(1) != cfg.K) {
    throw ShapeError("forward: input " + shape_str(x_in.shape()) + " does not match T_seg*batch*N x K = [" +
                     std::to_string(groups * n) + "," + std::to_string(cfg.K) + "]");
  }
  if (graph.pe.rank() != 2 || graph.pe.dim(0) != n || graph.pe.dim(1) != cfg.d_pe) {
    throw ShapeError("forward: positional encoding does not match N x d_pe");
  }
  const Ablation& ab = cfg.ablation;
  const Var x = tape.constant(x_in);
  const Var h0 = lift_nodes(x, p);

  Var u_macro;  // [groups*n, D]
  if (!ab.no_macro) {
    const Var proj = macro_projection(x, p, cfg, groups);
    const Var gates_x = add(matmul(proj, param(p, "lstm.w_ih")), param(p, "lstm.b"));
    const std::size_t step_rows = ab.node_wise_projection ? batch * n : batch;
    std::vector<Var> outs;
    LstmCarry carry;
    for (std::size_t t = 0; t < T; ++t) {
      carry = lstm_from_gates(slice(gates_x, 0, t * step_rows, (t + 1) * step_rows), carry, p, cfg.D);
      outs.push_back(carry.h);
    }
    u_macro = concat(outs, 0);
    if (!ab.node_wise_projection) u_macro = repeat_rows(u_macro, n);
  }

  Var u_micro;
  if (!ab.no_micro) {
    Var h = h0;
    for (std::size_t l = 0; l < cfg.L; ++l) {
      const bool last = l + 1 == cfg.L;
      MicroOutput m = micro_stream_layer(h, graph, p, l, cfg, groups, !last || trace != nullptr, trace != nullptr);
      if (trace) {
        trace->attention.push_back(std::move(m.attention));
        trace->h_layers.push_back(m.h.value());
      }
      h = m.h;
      if (last) u_micro = m.u;
    }
  }

  auto pick = [&](const Var& v) { return rows ? gather_rows(v, *rows) : v; };
  const Var h0_r = pick(h0);
  Fused fused;
  if (u_micro.valid() && u_macro.valid()) {
    fused = geometric_gate_fuse(pick(u_micro), pick(u_macro), p, cfg);
  } else if (u_micro.valid()) {
    fused.u_total = pick(u_micro);
  } else if (u_macro.valid()) {
    fused.u_total = pick(u_macro);
  }
  const Var h_hat = fused.u_total.valid() ? retract(h0_r, fused.u_total) : softplus(h0_r);
  const Var x_hat = readout(h_hat, p);

  if (trace) {
    trace->h0 = h0.value();
    trace->z = spherical_normalize(h0, cfg.epsilon).value();
    const Array zeros(h0_r.shape(), 0.0);
    trace->u_macro = u_macro.valid() ? pick(u_macro).value() : zeros;
    trace->u_micro = u_micro.valid() ? pick(u_micro).value() : zeros;
    trace->gate = fused.gate.valid() ? fused.gate.value() : Array(h0_r.shape(), 0.5);
    trace->h_hat = h_hat.value();
    trace->x_hat = x_hat.value();
  }
  return x_hat;
}

std::vector<double> predict_all(const ParamMap& params, const Array& x, std::size_t batch, const GraphContext& graph,
                                const ModelConfig& cfg, ForwardTrace* trace) {
  Tape tape;
  VarMap vars;
  for (const auto& [name, a] : params) vars.emplace(name, tape.constant(a));
  const Var out = forward(tape, vars, x, batch, graph, cfg, nullptr, trace);
  return out.value().storage();
}

bool SegmentMask::hides(std::size_t i, std::size_t t) const {
  return block.contains(t) && std::binary_search(nodes.begin(), nodes.end(), i);
}

Array build_inputs(const data::StandardizedPanel& panel, const std::vector<SegmentMask>& batch, const ModelConfig& cfg,
                   const std::vector<double>* noisy) {
  const std::size_t n = cfg.nodes, B = batch.size(), T = cfg.T_seg, K = cfg.K;
  if (panel.nodes() != n) throw ShapeError("build_inputs: panel has " + std::to_string(panel.nodes()) + " nodes, model " + std::to_string(n));
  if (noisy && noisy->size() != panel.y.size()) throw ShapeError("build_inputs: noisy panel size mismatch");
  const std::vector<double>& y = noisy ? *noisy : panel.y;
  Array x({T * B * n, K}, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    const SegmentMask& sm = batch[b];
    if (sm.segment.length != T || sm.segment.start + T > panel.steps) {
      throw ConfigError("build_inputs: segment does not match T_seg or exceeds the panel");
    }
    if (!std::is_sorted(sm.nodes.begin(), sm.nodes.end())) throw ConfigError("build_inputs: mask nodes must be sorted");
    for (std::size_t k = 0; k < T; ++k) {
      const std::size_t t = sm.segment.start + k;
      for (std::size_t i = 0; i < n; ++i) {
        double* dst = &x[row_index(k, b, i, B, n) * K];
        for (std::size_t l = 0; l < K; ++l) {
          if (l * cfg.tau > t) break;
          const std::size_t s = t - l * cfg.tau;
          if (sm.hides(i, s) || panel.raw_missing.missing(i, s)) continue;
          dst[l] = y[i * panel.steps + s];
        }
      }
    }
  }
  return x;
}

}  // namespace rieif::model
