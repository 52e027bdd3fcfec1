#include "dynonet/pem.hpp"

#include <algorithm>
#include <stdexcept>

namespace dynonet {

PemModel::PemModel(DynoNetModel model, std::size_t noise_n_b,
                   std::size_t noise_n_a)
    : model_(std::move(model)), noise_n_b_(noise_n_b), noise_n_a_(noise_n_a) {
  noise_.add("noise.b", std::vector<double>(noise_n_b + 1, 0.0));
  noise_.add("noise.a", std::vector<double>(noise_n_a, 0.0));
}

GBlockSpec PemModel::noise_spec() const {
  return {1, 1, noise_n_b_, noise_n_a_, 1};
}

TransferFunction PemModel::noise_check() const {
  return {noise_[ParamId{0}].value, noise_[ParamId{1}].value, 1};
}

void PemModel::set_noise_check(const TransferFunction& h_check) {
  if (h_check.n_k() != 1 || h_check.n_b() != noise_n_b_ ||
      h_check.n_a() != noise_n_a_) {
    throw std::invalid_argument(
        "PemModel: noise block must have n_k = 1 and the configured orders");
  }
  noise_[ParamId{0}].value = h_check.b();
  noise_[ParamId{1}].value = h_check.a();
}

TransferFunction PemModel::inverse_noise_filter() const {
  const auto& b = noise_[ParamId{0}].value;
  const auto& a = noise_[ParamId{1}].value;
  // (A + q^{-1} B) / A
  std::vector<double> num(std::max(a.size(), b.size() + 1) + 1, 0.0);
  num[0] = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) num[j + 1] += a[j];
  for (std::size_t j = 0; j < b.size(); ++j) num[j + 1] += b[j];
  return {num, a, 0};
}

TransferFunction PemModel::estimated_noise_filter() const {
  const auto& b = noise_[ParamId{0}].value;
  const auto& a = noise_[ParamId{1}].value;
  // A / (A + q^{-1} B)
  std::vector<double> num(a.size() + 1);
  num[0] = 1.0;
  std::copy(a.begin(), a.end(), num.begin() + 1);
  std::vector<double> den(std::max(a.size(), b.size() + 1), 0.0);
  for (std::size_t j = 0; j < a.size(); ++j) den[j] += a[j];
  for (std::size_t j = 0; j < b.size(); ++j) den[j] += b[j];
  return {num, den, 0};
}

bool PemModel::inverse_noise_filter_minimum_phase() const {
  return is_stable(estimated_noise_filter());
}

Var PemModel::prediction_error(Tape& tape, Var u, Var y) {
  Var residual = tape.sub(y, model_.forward(tape, u));
  const ParamId ids[] = {ParamId{0}, ParamId{1}};
  Var filtered = gblock_op(tape, residual, noise_, noise_spec(), ids);
  return tape.add(residual, filtered);
}

Var PemModel::one_step_predictor(Tape& tape, Var u, Var y) {
  return tape.sub(y, prediction_error(tape, u, y));
}

Var PemModel::pem_loss(Tape& tape, Var u, Var y) {
  return tape.mean(tape.square(prediction_error(tape, u, y)));
}

Signal PemModel::prediction_error(const Signal& u, const Signal& y) const {
  Signal m = model_.simulate(u);
  require_same_shape(y, m, "PemModel::prediction_error");
  Signal residual = y;
  auto r = residual.flat();
  auto mv = m.flat();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= mv[i];
  Signal eps = filter_forward(noise_check(), residual);
  auto e = eps.flat();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += r[i];
  return eps;
}

Signal PemModel::one_step_predictor(const Signal& u, const Signal& y) const {
  Signal eps = prediction_error(u, y);
  Signal out = y;
  auto o = out.flat();
  auto e = eps.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= e[i];
  return out;
}

double PemModel::pem_loss(const Signal& u, const Signal& y) const {
  Signal eps = prediction_error(u, y);
  double acc = 0.0;
  for (double v : eps.flat()) acc += v * v;
  return acc / static_cast<double>(eps.size());
}

}  // namespace dynonet
