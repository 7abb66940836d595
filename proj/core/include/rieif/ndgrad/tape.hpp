#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <string>

#include "rieif/ndgrad/array.hpp"

namespace rieif::nd {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

  const Array& value() const;
  const Shape& shape() const { return value().shape(); }
  /// Gradient after Tape::backward; a zero array if no gradient reached this value.
  Array grad() const;
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records one forward pass and replays it in reverse to accumulate gradients.
/// A tape is single-use: build, call backward once, read gradients, discard.
class Tape {
 public:
  /// Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape&, const Array& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Array value);
  Var leaf(Array value);

  /// Adds an op result. `requires_grad` should be true iff any input requires it.
  Var record(Array value, bool requires_grad, BackwardFn backward);

  void backward(const Var& root);

  const Array& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient accumulator for `id`, zero-initialised on first touch.
  Array& grad_acc(std::size_t id);
  const Array* grad_if_any(std::size_t id) const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Array value;
    Array grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

using ParamMap = std::map<std::string, Array>;
using VarMap = std::map<std::string, Var>;

/// A differentiable scalar program over named parameters.
using Program = std::function<Var(Tape&, const VarMap&)>;

struct GradResult {
  double loss = 0.0;
  ParamMap grads;
};

/// Runs `program` once and returns the loss and d(loss)/d(param) for every parameter.
/// Throws ShapeError if the program's output is not a scalar.
GradResult evaluate_with_gradients(const Program& program, const ParamMap& params);

/// Forward only.
double evaluate(const Program& program, const ParamMap& params);

}  // namespace rieif::nd
