#include "dynonet/tape.hpp"

#include <algorithm>
#include <stdexcept>

namespace dynonet {

// ParameterStore

ParamId ParameterStore::add(std::string name, std::vector<double> value) {
  if (find(name)) {
    throw std::invalid_argument("ParameterStore: duplicate parameter '" + name + "'");
  }
  std::vector<double> grad(value.size(), 0.0);
  params_.push_back({std::move(name), std::move(value), std::move(grad)});
  return ParamId{params_.size() - 1};
}

std::optional<ParamId> ParameterStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return ParamId{i};
  }
  return std::nullopt;
}

ParamId ParameterStore::at(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw std::out_of_range("ParameterStore: no parameter named '" +
                          std::string(name) + "'");
}

std::size_t ParameterStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

std::vector<double> ParameterStore::flat_values() const {
  std::vector<double> out;
  out.reserve(scalar_count());
  for (const auto& p : params_) out.insert(out.end(), p.value.begin(), p.value.end());
  return out;
}

std::vector<double> ParameterStore::flat_grads() const {
  std::vector<double> out;
  out.reserve(scalar_count());
  for (const auto& p : params_) out.insert(out.end(), p.grad.begin(), p.grad.end());
  return out;
}

void ParameterStore::assign_flat_values(std::span<const double> values) {
  if (values.size() != scalar_count()) {
    throw ShapeError("ParameterStore: expected " + std::to_string(scalar_count()) +
                     " values, got " + std::to_string(values.size()));
  }
  auto it = values.begin();
  for (auto& p : params_) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(p.value.size()), p.value.begin());
    it += static_cast<std::ptrdiff_t>(p.value.size());
  }
}

// BackwardContext

const Signal& BackwardContext::value() const { return tape_.nodes_[node_].value; }

const Signal& BackwardContext::adjoint() const { return tape_.nodes_[node_].adjoint; }

const Signal& BackwardContext::parent_value(std::size_t i) const {
  return tape_.nodes_[tape_.nodes_[node_].parents.at(i).index].value;
}

Signal& BackwardContext::parent_adjoint(std::size_t i) {
  return tape_.touch_adjoint(tape_.nodes_[node_].parents.at(i).index);
}

bool BackwardContext::parent_needs_adjoint(std::size_t i) const {
  return !tape_.nodes_[tape_.nodes_[node_].parents.at(i).index].constant;
}

// Tape

const Tape::Node& Tape::node(Var v) const {
  if (v.index >= nodes_.size()) {
    throw std::logic_error("Tape: variable does not belong to this tape");
  }
  return nodes_[v.index];
}

Signal& Tape::touch_adjoint(std::size_t index) {
  Node& n = nodes_[index];
  if (n.adjoint.empty() && !n.value.empty()) {
    n.adjoint = Signal(n.value.batch(), n.value.length(), n.value.channels());
  }
  return n.adjoint;
}

Var Tape::record(OpKind kind, Signal value, std::vector<Var> parents,
                 BackwardFn backward) {
  for (Var p : parents) node(p);
  nodes_.push_back({kind, std::move(value), Signal{}, std::move(parents),
                    std::move(backward), false});
  return Var{nodes_.size() - 1};
}

Var Tape::input(Signal value) {
  return record(OpKind::kInput, std::move(value), {}, nullptr);
}

Var Tape::constant(Signal value) {
  Var v = record(OpKind::kInput, std::move(value), {}, nullptr);
  nodes_[v.index].constant = true;
  return v;
}

Var Tape::add(Var x, Var y) {
  const Signal& vx = node(x).value;
  const Signal& vy = node(y).value;
  require_same_shape(vx, vy, "Tape::add");
  Signal out = vx;
  auto o = out.flat();
  auto b = vy.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += b[i];
  return record(OpKind::kAdd, std::move(out), {x, y}, [](BackwardContext& ctx) {
    auto g = ctx.adjoint().flat();
    for (std::size_t p = 0; p < 2; ++p) {
      auto dst = ctx.parent_adjoint(p).flat();
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    }
  });
}

Var Tape::sub(Var x, Var y) {
  const Signal& vx = node(x).value;
  const Signal& vy = node(y).value;
  require_same_shape(vx, vy, "Tape::sub");
  Signal out = vx;
  auto o = out.flat();
  auto b = vy.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= b[i];
  return record(OpKind::kSub, std::move(out), {x, y}, [](BackwardContext& ctx) {
    auto g = ctx.adjoint().flat();
    auto dx = ctx.parent_adjoint(0).flat();
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
    auto dy = ctx.parent_adjoint(1).flat();
    for (std::size_t i = 0; i < g.size(); ++i) dy[i] -= g[i];
  });
}

Var Tape::scale(Var x, double factor) {
  Signal out = node(x).value;
  for (double& v : out.flat()) v *= factor;
  return record(OpKind::kScale, std::move(out), {x}, [factor](BackwardContext& ctx) {
    auto g = ctx.adjoint().flat();
    auto dx = ctx.parent_adjoint(0).flat();
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += factor * g[i];
  });
}

Var Tape::square(Var x) {
  Signal out = node(x).value;
  for (double& v : out.flat()) v *= v;
  return record(OpKind::kSquare, std::move(out), {x}, [](BackwardContext& ctx) {
    auto g = ctx.adjoint().flat();
    auto xv = ctx.parent_value(0).flat();
    auto dx = ctx.parent_adjoint(0).flat();
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += 2.0 * xv[i] * g[i];
  });
}

Var Tape::sum(Var x) {
  double acc = 0.0;
  for (double v : node(x).value.flat()) acc += v;
  return record(OpKind::kSum, Signal::scalar(acc), {x}, [](BackwardContext& ctx) {
    const double g = ctx.adjoint().item();
    for (double& d : ctx.parent_adjoint(0).flat()) d += g;
  });
}

Var Tape::mean(Var x) {
  const Signal& vx = node(x).value;
  if (vx.empty()) throw ShapeError("Tape::mean: empty signal");
  const double n = static_cast<double>(vx.size());
  double acc = 0.0;
  for (double v : vx.flat()) acc += v;
  return record(OpKind::kMean, Signal::scalar(acc / n), {x},
                [n](BackwardContext& ctx) {
                  const double g = ctx.adjoint().item() / n;
                  for (double& d : ctx.parent_adjoint(0).flat()) d += g;
                });
}

Var Tape::detach(Var x) {
  return record(OpKind::kDetach, node(x).value, {}, nullptr);
}

const Signal& Tape::value(Var v) const { return node(v).value; }

Signal Tape::adjoint(Var v) const {
  const Node& n = node(v);
  if (n.adjoint.empty()) {
    return Signal(n.value.batch(), n.value.length(), n.value.channels());
  }
  return n.adjoint;
}

OpKind Tape::kind(Var v) const { return node(v).kind; }

void Tape::backward(Var loss) {
  if (loss.index >= nodes_.size()) {
    throw std::logic_error("Tape::backward: loss node was never recorded");
  }
  if (backward_done_) {
    throw std::logic_error("Tape::backward: already ran on this tape");
  }
  if (nodes_[loss.index].value.size() != 1) {
    throw ShapeError("Tape::backward: loss must be a scalar, got " +
                     nodes_[loss.index].value.shape_string());
  }
  backward_done_ = true;
  touch_adjoint(loss.index).flat()[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.adjoint.empty() || !n.backward) continue;
    BackwardContext ctx(*this, i);
    n.backward(ctx);
  }
}

}  // namespace dynonet
