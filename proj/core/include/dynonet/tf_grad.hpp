#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynonet/signal.hpp"
#include "dynonet/transfer_function.hpp"

namespace dynonet {

/// Adjoints of a G-block: dL/db_j, dL/da_j and dL/du_t.
struct GBlockGradients {
  std::vector<double> b_bar;
  std::vector<double> a_bar;
  Signal u_bar;
};

/// Numerator sensitivity sigma_b0(t) = dy(t)/db_0 = u(t - n_k) / A(q).
///
/// The remaining sensitivities are shifts: sigma_bj(t) = sigma_b0(t - j).
Signal sens_b0(const TfView& g, const Signal& u);
Signal sens_b0(const TransferFunction& g, const Signal& u);

/// b_bar_j = sum_{t >= j} y_bar(t) sigma_b0(t - j), for j = 0..n_b, summed
/// over the batch.
std::vector<double> grad_b(const Signal& y_bar, const Signal& sigma_b0,
                           std::size_t n_b);

/// Denominator sensitivity sigma_a1(t) = dy(t)/da_1 = -y(t - 1) / A(q).
///
/// sigma_aj(t) = sigma_a1(t - j + 1).
Signal sens_a1(const TfView& g, const Signal& y);
Signal sens_a1(const TransferFunction& g, const Signal& y);

/// a_bar_j = sum_{t >= j-1} y_bar(t) sigma_a1(t - j + 1), for j = 1..n_a,
/// summed over the batch.
std::vector<double> grad_a(const Signal& y_bar, const Signal& sigma_a1,
                           std::size_t n_a);

/// u_bar = flip(G(q) flip(y_bar)): the input adjoint, computed by filtering
/// the output adjoint in reverse time.
Signal grad_u(const TfView& g, const Signal& y_bar);
Signal grad_u(const TransferFunction& g, const Signal& y_bar);

/// Full backward pass of one SISO block given the forward input `u`, the
/// forward output `y` and the incoming adjoint `y_bar`. Sensitivities are
/// recomputed from `u` and `y`.
GBlockGradients gblock_backward(const TfView& g, const Signal& u,
                                const Signal& y, const Signal& y_bar);

namespace detail {

// Accumulating single-series variants used by the MIMO block. The
// `scratch` buffer must have the series length.
void accumulate_grad_b(std::span<const double> y_bar,
                       std::span<const double> sigma_b0,
                       std::span<double> b_bar);
void accumulate_grad_a(std::span<const double> y_bar,
                       std::span<const double> sigma_a1,
                       std::span<double> a_bar);
void accumulate_grad_u(const TfView& g, std::span<const double> y_bar,
                       std::span<double> u_bar, std::span<double> scratch_in,
                       std::span<double> scratch_out);

}  // namespace detail

}  // namespace dynonet
