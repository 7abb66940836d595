#include "rieif/ndgrad/tape.hpp"

#include "rieif/error.hpp"

namespace rieif::nd {

const Array& Var::value() const { return tape_->value(id_); }

Array Var::grad() const {
  if (const Array* g = tape_->grad_if_any(id_)) return *g;
  return Array(value().shape(), 0.0);
}

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Array value) {
  nodes_.push_back(Node{std::move(value), Array(), false, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Array value) {
  nodes_.push_back(Node{std::move(value), Array(), true, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Array value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Array(), requires_grad, false,
                        requires_grad ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

Array& Tape::grad_acc(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Array(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

const Array* Tape::grad_if_any(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.has_grad ? &n.grad : nullptr;
}

void Tape::backward(const Var& root) {
  if (root.value().size() != 1) {
    throw ShapeError("backward: output must be scalar, got shape " + shape_str(root.shape()));
  }
  if (!requires_grad(root.id())) return;
  grad_acc(root.id()).fill(1.0);
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

GradResult evaluate_with_gradients(const Program& program, const ParamMap& params) {
  Tape tape;
  VarMap vars;
  for (const auto& [name, value] : params) vars.emplace(name, tape.leaf(value));
  Var out = program(tape, vars);
  if (out.value().size() != 1) {
    throw ShapeError("evaluate_with_gradients: program output must be scalar, got " +
                     shape_str(out.shape()));
  }
  tape.backward(out);
  GradResult result;
  result.loss = out.value().item();
  for (const auto& [name, var] : vars) result.grads.emplace(name, var.grad());
  return result;
}

double evaluate(const Program& program, const ParamMap& params) {
  Tape tape;
  VarMap vars;
  for (const auto& [name, value] : params) vars.emplace(name, tape.constant(value));
  Var out = program(tape, vars);
  if (out.value().size() != 1) {
    throw ShapeError("evaluate: program output must be scalar, got " + shape_str(out.shape()));
  }
  return out.value().item();
}

}  // namespace rieif::nd
