#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynonet/signal.hpp"

namespace dynonet {

/// Handle to a parameter registered in a ParameterStore.
struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

/// A named trainable tensor together with its adjoint slot.
struct Parameter {
  std::string name;
  std::vector<double> value;
  std::vector<double> grad;
};

/// Named parameters; names are unique and sizes are fixed at registration.
class ParameterStore {
 public:
  /// Throws std::invalid_argument on a duplicate name.
  ParamId add(std::string name, std::vector<double> value);

  Parameter& operator[](ParamId id) { return params_.at(id.index); }
  const Parameter& operator[](ParamId id) const { return params_.at(id.index); }

  std::optional<ParamId> find(std::string_view name) const;
  /// Like find() but throws std::out_of_range for unknown names.
  ParamId at(std::string_view name) const;

  std::size_t size() const noexcept { return params_.size(); }
  /// Total number of trainable scalars.
  std::size_t scalar_count() const noexcept;

  void zero_grad();

  /// Values of all parameters concatenated in registration order.
  std::vector<double> flat_values() const;
  std::vector<double> flat_grads() const;
  /// Inverse of flat_values(); throws ShapeError on a size mismatch.
  void assign_flat_values(std::span<const double> values);

  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

 private:
  std::vector<Parameter> params_;
};

/// Label of a tape node; purely informational.
enum class OpKind {
  kInput,
  kGBlock,
  kMlp,
  kAdd,
  kSub,
  kScale,
  kSquare,
  kMean,
  kSum,
  kQuantizedLoglik,
  kDetach,
  kCustom,
};

/// Handle to a node of a Tape.
struct Var {
  std::size_t index = 0;
  friend bool operator==(Var, Var) = default;
};

class Tape;

/// View handed to a node's backward function: read the node's own value and
/// adjoint, read parent values, accumulate into parent adjoints.
class BackwardContext {
 public:
  const Signal& value() const;
  const Signal& adjoint() const;
  const Signal& parent_value(std::size_t i) const;
  /// Zero-initialized on first access.
  Signal& parent_adjoint(std::size_t i);
  /// False when parent `i` is a constant() leaf.
  bool parent_needs_adjoint(std::size_t i) const;

 private:
  friend class Tape;
  BackwardContext(Tape& tape, std::size_t node) : tape_(tape), node_(node) {}
  Tape& tape_;
  std::size_t node_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

/// Dynamic reverse-mode tape. Nodes are evaluated eagerly as they are
/// recorded, so creation order is a valid forward order; backward() walks it
/// in reverse. One tape serves one forward/backward pass.
class Tape {
 public:
  /// Leaf node. Its adjoint is available after backward().
  Var input(Signal value);
  /// Leaf node that never needs an adjoint (training data). Ops may skip
  /// computing gradients that would only flow into it.
  Var constant(Signal value);

  Var add(Var x, Var y);
  Var sub(Var x, Var y);
  Var scale(Var x, double factor);
  Var square(Var x);
  /// Mean over every element; returns a scalar node.
  Var mean(Var x);
  /// Sum over every element; returns a scalar node.
  Var sum(Var x);
  /// Same value as `x`; blocks gradient flow into `x`.
  Var detach(Var x);

  /// Records a node computed by the caller. `backward` must accumulate into
  /// the adjoints of `parents` (and into any parameter gradients it owns).
  Var record(OpKind kind, Signal value, std::vector<Var> parents,
             BackwardFn backward);

  const Signal& value(Var v) const;
  /// Adjoint after backward(); zeros for nodes the loss does not reach.
  Signal adjoint(Var v) const;
  OpKind kind(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates in reverse creation order.
  /// Throws std::logic_error if `loss` is not a node of this tape or if
  /// backward() already ran; ShapeError if `loss` is not a scalar.
  void backward(Var loss);

 private:
  friend class BackwardContext;

  struct Node {
    OpKind kind;
    Signal value;
    Signal adjoint;  // empty until touched during backward
    std::vector<Var> parents;
    BackwardFn backward;
    bool constant = false;
  };

  const Node& node(Var v) const;
  Signal& touch_adjoint(std::size_t index);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace dynonet
