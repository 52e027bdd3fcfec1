#pragma once

#include <cstddef>

#include "dynonet/blocks.hpp"
#include "dynonet/signal.hpp"
#include "dynonet/tape.hpp"
#include "dynonet/transfer_function.hpp"

namespace dynonet {

/// Deterministic model M plus a strictly proper noise block Hc(q) with one
/// input delay. The inverse noise filter H^{-1}(q) = 1 + Hc(q) is monic by
/// construction, so the one-step-ahead predictor only uses past outputs.
class PemModel {
 public:
  /// Hc starts at zero (H = 1), i.e. training begins from the output-error
  /// criterion.
  explicit PemModel(DynoNetModel model, std::size_t noise_n_b = 2,
                    std::size_t noise_n_a = 2);

  DynoNetModel& deterministic() noexcept { return model_; }
  const DynoNetModel& deterministic() const noexcept { return model_; }

  ParameterStore& noise_parameters() noexcept { return noise_; }
  const ParameterStore& noise_parameters() const noexcept { return noise_; }

  /// Hc(q); always has n_k = 1.
  TransferFunction noise_check() const;
  /// Replaces the Hc coefficients. Throws std::invalid_argument unless
  /// n_k = 1 and the orders match.
  void set_noise_check(const TransferFunction& h_check);

  /// H^{-1}(q) = 1 + Hc(q) as a single rational filter.
  TransferFunction inverse_noise_filter() const;
  /// H(q) = 1 / (1 + Hc(q)) = A / (A + q^{-1} B) for Hc = q^{-1} B / A.
  TransferFunction estimated_noise_filter() const;
  /// True when H is stable, i.e. 1 + Hc has all numerator roots inside the
  /// unit circle.
  bool inverse_noise_filter_minimum_phase() const;

  /// eps = H^{-1}(q) (y - M(u)) recorded on the tape.
  Var prediction_error(Tape& tape, Var u, Var y);
  /// y_hat = y - eps.
  Var one_step_predictor(Tape& tape, Var u, Var y);
  /// mean(eps^2).
  Var pem_loss(Tape& tape, Var u, Var y);

  Signal prediction_error(const Signal& u, const Signal& y) const;
  Signal one_step_predictor(const Signal& u, const Signal& y) const;
  double pem_loss(const Signal& u, const Signal& y) const;

 private:
  GBlockSpec noise_spec() const;

  DynoNetModel model_;
  ParameterStore noise_;
  std::size_t noise_n_b_;
  std::size_t noise_n_a_;
};

}  // namespace dynonet
