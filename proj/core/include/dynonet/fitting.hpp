#pragma once

#include <cstddef>
#include <span>

#include "dynonet/blocks.hpp"
#include "dynonet/optim.hpp"
#include "dynonet/pem.hpp"
#include "dynonet/quantized.hpp"
#include "dynonet/signal.hpp"

namespace dynonet {

/// Batch elements `index` of `x`, in order.
Signal select_batch(const Signal& x, std::span<const std::size_t> index);
BinSignal select_batch(const BinSignal& z, std::span<const std::size_t> index);

// The fit_* helpers train in normalized units when the model's
// normalization is enabled (its statistics must already be set); the
// quantized fit normalizes the input only, since the likelihood is defined
// on the physical output scale.

/// mean((M(u) - y)^2).
TrainResult fit_mse(DynoNetModel& model, const Signal& u, const Signal& y,
                    const TrainConfig& config);

/// Joint training of M and the noise block on mean(eps^2).
TrainResult fit_pem(PemModel& model, const Signal& u, const Signal& y,
                    const TrainConfig& config);

/// Joint training of M and log(sigma_e) on the negative mean log-likelihood
/// of the observed bins. `log_sigma_e` is the starting value on entry and
/// the trained value on return.
TrainResult fit_quantized(DynoNetModel& model, double& log_sigma_e, const Signal& u,
                          const BinSignal& z, const Quantizer& qz,
                          const TrainConfig& config);

}  // namespace dynonet
