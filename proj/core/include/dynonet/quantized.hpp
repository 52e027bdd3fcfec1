#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dynonet/signal.hpp"
#include "dynonet/tape.hpp"

namespace dynonet {

/// Thresholds q_0 < q_1 < ... < q_K defining K bins; bin m is the half-open
/// interval (q_m, q_{m+1}]. For likelihood purposes the first bin extends to
/// -inf and the last to +inf.
class Quantizer {
 public:
  /// Throws std::invalid_argument unless the thresholds are finite, strictly
  /// increasing and define at least two bins.
  explicit Quantizer(std::vector<double> thresholds);

  /// `bins` equal-width bins spanning [lo, hi]: q_m = lo + m (hi - lo) / bins.
  static Quantizer uniform(double lo, double hi, std::size_t bins);

  std::size_t bins() const noexcept { return thresholds_.size() - 1; }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }

  /// Bin of x; values <= q_0 map to 0, values > q_K to K - 1.
  int quantize(double x) const;

  /// Likelihood interval of bin m, with the outer bins unbounded.
  double lower(int bin) const;
  double upper(int bin) const;

  friend bool operator==(const Quantizer&, const Quantizer&) = default;

 private:
  std::vector<double> thresholds_;
};

/// Integer-valued single-channel series of shape (batch, T).
struct BinSignal {
  std::size_t batch = 0;
  std::size_t length = 0;
  std::vector<int> data;  // batch-major

  int operator()(std::size_t b, std::size_t t) const { return data[b * length + t]; }
  int& operator()(std::size_t b, std::size_t t) { return data[b * length + t]; }
};

/// Applies the quantizer to every sample of a single-channel signal.
BinSignal quantize(const Signal& x, const Quantizer& qz);

/// Measurement-noise scale, parameterized through its logarithm.
struct NoiseScale {
  double log_sigma_e = 0.0;
  double sigma() const { return std::exp(log_sigma_e); }
};

/// Standard normal CDF and density.
double phi_cdf(double x);
double phi_pdf(double x);
/// log Phi(x), accurate far into the lower tail.
double log_phi_cdf(double x);
/// log(1 - Phi(x)), accurate far into the upper tail.
double log_phi_sf(double x);
/// log(Phi(u) - Phi(l)) for l < u; either bound may be infinite.
double log_phi_cdf_diff(double l, double u);

/// Log-probability of one observed bin and its derivatives.
struct BinLogLikelihood {
  double value = 0.0;
  double d_y_sim = 0.0;
  double d_log_sigma = 0.0;
  bool floored = false;  // probability underflowed; value clamped to log(1e-300)
};

BinLogLikelihood bin_log_likelihood(double y_sim, int bin, double log_sigma_e,
                                    const Quantizer& qz);

struct LogLikelihood {
  double value = 0.0;
  std::size_t floor_hits = 0;
};

/// sum_t log P(Q(y_sim_t + e_t) = z_t) with e_t ~ N(0, sigma_e^2).
LogLikelihood quantized_loglik(const Signal& y_sim, const BinSignal& z,
                               NoiseScale sigma, const Quantizer& qz);

/// Tape node computing the same sum. The gradient with respect to the
/// scalar parameter `log_sigma` accumulates into `store`. When
/// `floor_hits` is non-null it receives the number of floored samples.
Var quantized_loglik_op(Tape& tape, Var y_sim, const BinSignal& z,
                        ParameterStore& store, ParamId log_sigma,
                        const Quantizer& qz, std::size_t* floor_hits = nullptr);

/// -quantized_loglik / (number of samples): the training loss.
Var quantized_nll_loss(Tape& tape, Var y_sim, const BinSignal& z,
                       ParameterStore& store, ParamId log_sigma,
                       const Quantizer& qz, std::size_t* floor_hits = nullptr);

}  // namespace dynonet
