#include "dynonet/quantized.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dynonet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogFloor = -690.7755278982137;  // log(1e-300)
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// log(1 - exp(x)) for x < 0.
double log1mexp(double x) {
  return x > -std::numbers::ln2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double log_phi_pdf(double x) { return -0.5 * x * x - kHalfLog2Pi; }

// x * phi(x) / P evaluated in the log domain; zero at infinite x.
double scaled_density(double x, double log_p, bool times_x) {
  if (!std::isfinite(x)) return 0.0;
  const double r = std::exp(log_phi_pdf(x) - log_p);
  return times_x ? x * r : r;
}

}  // namespace

// Quantizer

Quantizer::Quantizer(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
  if (thresholds_.size() < 3) {
    throw std::invalid_argument("Quantizer: need at least two bins (three thresholds)");
  }
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    if (!std::isfinite(thresholds_[i])) {
      throw std::invalid_argument("Quantizer: thresholds must be finite");
    }
    if (i > 0 && !(thresholds_[i] > thresholds_[i - 1])) {
      throw std::invalid_argument("Quantizer: thresholds must be strictly increasing");
    }
  }
}

Quantizer Quantizer::uniform(double lo, double hi, std::size_t bins) {
  if (bins < 2 || !(hi > lo)) {
    throw std::invalid_argument("Quantizer::uniform: need hi > lo and bins >= 2");
  }
  std::vector<double> q(bins + 1);
  for (std::size_t m = 0; m <= bins; ++m) {
    q[m] = lo + static_cast<double>(m) * (hi - lo) / static_cast<double>(bins);
  }
  q.back() = hi;
  return Quantizer(std::move(q));
}

int Quantizer::quantize(double x) const {
  // Number of interior thresholds strictly below x; this realizes the
  // right-closed intervals and saturates at both ends.
  const auto first = thresholds_.begin() + 1;
  const auto last = thresholds_.end() - 1;
  return static_cast<int>(std::lower_bound(first, last, x) - first);
}

double Quantizer::lower(int bin) const {
  if (bin < 0 || static_cast<std::size_t>(bin) >= bins()) {
    throw std::out_of_range("Quantizer: bin " + std::to_string(bin) + " out of range");
  }
  return bin == 0 ? -kInf : thresholds_[static_cast<std::size_t>(bin)];
}

double Quantizer::upper(int bin) const {
  if (bin < 0 || static_cast<std::size_t>(bin) >= bins()) {
    throw std::out_of_range("Quantizer: bin " + std::to_string(bin) + " out of range");
  }
  return static_cast<std::size_t>(bin) + 1 == bins()
             ? kInf
             : thresholds_[static_cast<std::size_t>(bin) + 1];
}

BinSignal quantize(const Signal& x, const Quantizer& qz) {
  if (x.channels() != 1) {
    throw ShapeError("quantize: expected a single-channel signal, got " + x.shape_string());
  }
  BinSignal z{x.batch(), x.length(), std::vector<int>(x.batch() * x.length())};
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t t = 0; t < x.length(); ++t) z(b, t) = qz.quantize(x(b, t, 0));
  }
  return z;
}

// Gaussian tails

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double phi_pdf(double x) { return std::exp(log_phi_pdf(x)); }

double log_phi_sf(double x) {
  if (x == kInf) return -kInf;
  if (x < 30.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  // Mills ratio by its continued fraction: sf(x) = phi(x) / f(x).
  double f = x;
  for (int k = 60; k >= 1; --k) f = x + k / f;
  return log_phi_pdf(x) - std::log(f);
}

double log_phi_cdf(double x) { return log_phi_sf(-x); }

namespace {

// 8-point Gauss-Legendre rule on [-1, 1] (symmetric half).
constexpr std::array<double, 4> kGlNode{0.1834346424956498, 0.5255324099163290,
                                        0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGlWeight{0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};

double hazard(double x) { return std::exp(log_phi_pdf(x) - log_phi_sf(x)); }

// log sf(u) - log sf(l) = -(integral of the hazard over [l, u]). Subtracting
// the two log tails cancels badly when u - l is small; the hazard is smooth,
// so the quadrature keeps full relative accuracy.
double log_sf_ratio(double l, double u) {
  if (u - l > 1.0) return log_phi_sf(u) - log_phi_sf(l);
  const double mid = 0.5 * (l + u);
  const double half = 0.5 * (u - l);
  double acc = 0.0;
  for (std::size_t i = 0; i < kGlNode.size(); ++i) {
    acc += kGlWeight[i] * (hazard(mid - half * kGlNode[i]) + hazard(mid + half * kGlNode[i]));
  }
  return -half * acc;
}

}  // namespace

double log_phi_cdf_diff(double l, double u) {
  if (!(l < u)) return -kInf;
  if (l >= 0.0) {
    // Both bounds in the upper tail: sf(l) (1 - sf(u) / sf(l)).
    return log_phi_sf(l) + log1mexp(log_sf_ratio(l, u));
  }
  if (u <= 0.0) return log_phi_cdf_diff(-u, -l);
  // l < 0 < u: the probability is at least that of one half-line piece.
  const double outside = phi_cdf(l) + phi_cdf(-u);
  if (outside < 0.3) return std::log1p(-outside);
  return std::log(0.5 * (std::erf(u / std::numbers::sqrt2) -
                         std::erf(l / std::numbers::sqrt2)));
}

// Likelihood

BinLogLikelihood bin_log_likelihood(double y_sim, int bin, double log_sigma_e,
                                    const Quantizer& qz) {
  const double sigma = std::exp(log_sigma_e);
  const double lo = (qz.lower(bin) - y_sim) / sigma;
  const double hi = (qz.upper(bin) - y_sim) / sigma;
  BinLogLikelihood out;
  const double log_p = log_phi_cdf_diff(lo, hi);
  if (!std::isfinite(log_p)) {
    out.value = kLogFloor;
    out.floored = true;
    return out;
  }
  out.value = log_p;
  out.d_y_sim = (scaled_density(lo, log_p, false) - scaled_density(hi, log_p, false)) / sigma;
  out.d_log_sigma = scaled_density(lo, log_p, true) - scaled_density(hi, log_p, true);
  return out;
}

namespace {

void check_shapes(const Signal& y_sim, const BinSignal& z, const Quantizer& qz) {
  if (y_sim.channels() != 1 || y_sim.batch() != z.batch || y_sim.length() != z.length) {
    throw ShapeError("quantized_loglik: simulated output " + y_sim.shape_string() +
                     " does not match observations (" + std::to_string(z.batch) +
                     ", " + std::to_string(z.length) + ")");
  }
  for (int m : z.data) {
    if (m < 0 || static_cast<std::size_t>(m) >= qz.bins()) {
      throw std::out_of_range("quantized_loglik: observed bin " + std::to_string(m) +
                              " outside [0, " + std::to_string(qz.bins() - 1) + "]");
    }
  }
}

}  // namespace

LogLikelihood quantized_loglik(const Signal& y_sim, const BinSignal& z,
                               NoiseScale sigma, const Quantizer& qz) {
  check_shapes(y_sim, z, qz);
  LogLikelihood out;
  for (std::size_t b = 0; b < z.batch; ++b) {
    for (std::size_t t = 0; t < z.length; ++t) {
      const auto r = bin_log_likelihood(y_sim(b, t, 0), z(b, t), sigma.log_sigma_e, qz);
      out.value += r.value;
      out.floor_hits += r.floored ? 1 : 0;
    }
  }
  return out;
}

Var quantized_loglik_op(Tape& tape, Var y_sim, const BinSignal& z,
                        ParameterStore& store, ParamId log_sigma,
                        const Quantizer& qz, std::size_t* floor_hits) {
  const Signal& ys = tape.value(y_sim);
  check_shapes(ys, z, qz);
  if (store[log_sigma].value.size() != 1) {
    throw ShapeError("quantized_loglik_op: log_sigma must be a scalar parameter");
  }
  const double ls = store[log_sigma].value[0];
  auto d_y = std::make_shared<std::vector<double>>(ys.size());
  double d_ls = 0.0;
  double total = 0.0;
  std::size_t hits = 0;
  for (std::size_t b = 0; b < z.batch; ++b) {
    for (std::size_t t = 0; t < z.length; ++t) {
      const auto r = bin_log_likelihood(ys(b, t, 0), z(b, t), ls, qz);
      total += r.value;
      d_ls += r.d_log_sigma;
      hits += r.floored ? 1 : 0;
      (*d_y)[b * z.length + t] = r.d_y_sim;
    }
  }
  if (floor_hits != nullptr) *floor_hits = hits;
  return tape.record(OpKind::kQuantizedLoglik, Signal::scalar(total), {y_sim},
                     [&store, log_sigma, d_y, d_ls](BackwardContext& ctx) {
                       const double g = ctx.adjoint().item();
                       store[log_sigma].grad[0] += g * d_ls;
                       if (!ctx.parent_needs_adjoint(0)) return;
                       Signal& y_bar = ctx.parent_adjoint(0);
                       for (std::size_t b = 0; b < y_bar.batch(); ++b) {
                         auto dst = y_bar.series(b, 0);
                         for (std::size_t t = 0; t < dst.size(); ++t) {
                           dst[t] += g * (*d_y)[b * dst.size() + t];
                         }
                       }
                     });
}

Var quantized_nll_loss(Tape& tape, Var y_sim, const BinSignal& z,
                       ParameterStore& store, ParamId log_sigma,
                       const Quantizer& qz, std::size_t* floor_hits) {
  const double n = static_cast<double>(z.batch * z.length);
  if (n == 0.0) throw ShapeError("quantized_nll_loss: no observations");
  return tape.scale(quantized_loglik_op(tape, y_sim, z, store, log_sigma, qz, floor_hits),
                    -1.0 / n);
}

}  // namespace dynonet
