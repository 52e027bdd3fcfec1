#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dynonet/blocks.hpp"
#include "dynonet/quantized.hpp"
#include "dynonet/signal.hpp"
#include "dynonet/transfer_function.hpp"

namespace dynonet {

/// Colored-noise shaping filter of the WH experiment:
/// H_o(q) = (1 - 1.568 q^-1 + 0.902 q^-2) / (1 - 1.901 q^-1 + 0.9409 q^-2).
TransferFunction wh_noise_filter();

/// sqrt(sum_t g_t^2) over the first `length` impulse-response samples.
double h2_norm(const TransferFunction& g, std::size_t length = 200000);

/// i.i.d. N(0, std^2) samples of shape (batch, T, 1).
Signal white_noise(std::mt19937_64& rng, std::size_t batch, std::size_t length,
                   double std_dev);

struct MultisineSpec {
  double rms = 1.0;
  /// Highest excited frequency in cycles/sample.
  double max_frequency = 0.1;
  /// Number of excited DFT lines starting at 1/T; 0 excites every line up to
  /// max_frequency.
  std::size_t tones = 0;
};

/// One period (T samples) of a flat-spectrum multisine with uniformly random
/// phases, scaled to the requested rms. Shape (1, T, 1).
Signal multisine(std::mt19937_64& rng, std::size_t length, const MultisineSpec& spec);

/// Random filter whose poles and zeros have modulus in [0.5, max_modulus]
/// (a complex pair per two orders, a real root for an odd remainder). The
/// numerator is scaled to unit H2 norm.
TransferFunction random_stable_filter(std::mt19937_64& rng, std::size_t n_b,
                                      std::size_t n_a, std::size_t n_k,
                                      double max_modulus = 0.95);

struct WhColoredConfig {
  double noise_std = 0.1;         // standard deviation of the colored noise v
  double input_std = 1.0;         // white-noise excitation
  std::size_t truth_order = 2;    // n_a = n_b of the ground-truth filters
  std::size_t test_length = 0;    // 0: same as the training length
};

struct WhColoredDataset {
  Signal u, y_clean, y;            // training data
  Signal u_test, y_test;           // noiseless held-out data
  DynoNetModel truth;
  TransferFunction noise_filter = wh_noise_filter();
  double noise_std = 0.0;
  double white_std = 0.0;          // std of e such that H_o e has noise_std
  std::uint64_t seed = 0;
};

/// y = WH(u) + H_o(q) e with a synthetic Wiener-Hammerstein ground truth.
WhColoredDataset generate_wh_colored(std::uint64_t seed, std::size_t length,
                                     const WhColoredConfig& config = {});

struct PwhQuantizedConfig {
  double sigma_e = 0.1;
  double max_frequency = 0.1;
  std::size_t tones = 0;
  std::size_t truth_order = 2;
  std::size_t test_realizations = 1;  // per rms level
  Quantizer quantizer = Quantizer::uniform(-1.0, 1.0, 12);
};

struct PwhQuantizedDataset {
  Signal u, y_latent;              // (levels * realizations, T, 1)
  BinSignal z;
  std::vector<double> rms;         // rms level of each training sequence
  Signal u_test, y_test;           // noiseless latent output, held-out phases
  std::vector<double> test_rms;
  DynoNetModel truth;
  Quantizer quantizer = Quantizer::uniform(-1.0, 1.0, 12);
  double sigma_e = 0.0;
  std::uint64_t seed = 0;
};

/// Multisine excitation at every rms level and realization, a synthetic
/// parallel Wiener-Hammerstein ground truth, additive Gaussian noise, and
/// quantization.
PwhQuantizedDataset generate_pwh_quantized(std::uint64_t seed, std::size_t length,
                                           std::span<const double> rms_levels,
                                           std::size_t realizations,
                                           const PwhQuantizedConfig& config = {});

/// Default rms levels of the quantized experiment (output units of volts).
std::vector<double> default_rms_levels();

}  // namespace dynonet
