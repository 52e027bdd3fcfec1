#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dynonet/signal.hpp"

namespace dynonet {

/// Non-owning view of the coefficients of G(q) = q^{-n_k} B(q) / A(q).
///
/// `b` holds b_0..b_{n_b}; `a` holds a_1..a_{n_a} (the leading 1 of A(q) is
/// implicit).
struct TfView {
  std::span<const double> b;
  std::span<const double> a;
  std::size_t n_k = 0;
};

/// Coefficients of one SISO rational filter.
class TransferFunction {
 public:
  /// Throws std::invalid_argument if `b` is empty.
  TransferFunction(std::vector<double> b, std::vector<double> a,
                   std::size_t n_k = 0);

  /// All-zero filter of the given orders.
  static TransferFunction zeros(std::size_t n_b, std::size_t n_a,
                                std::size_t n_k = 0);

  const std::vector<double>& b() const noexcept { return b_; }
  const std::vector<double>& a() const noexcept { return a_; }
  std::size_t n_k() const noexcept { return n_k_; }
  std::size_t n_b() const noexcept { return b_.size() - 1; }
  std::size_t n_a() const noexcept { return a_.size(); }

  TfView view() const noexcept { return {b_, a_, n_k_}; }

  friend bool operator==(const TransferFunction&,
                         const TransferFunction&) = default;

 private:
  std::vector<double> b_;
  std::vector<double> a_;
  std::size_t n_k_;
};

/// y(t) = -sum_j a_j y(t-j) + sum_j b_j u(t-j-n_k), from rest.
///
/// `y` must have the same length as `u` and must not alias it. Throws
/// DivergenceError at the first non-finite output sample.
void filter_series(const TfView& g, std::span<const double> u,
                   std::span<double> y);

/// Filters every batch element of a single-channel signal.
Signal filter_forward(const TransferFunction& g, const Signal& u);
Signal filter_forward(const TfView& g, const Signal& u);

/// First T samples of the impulse response.
std::vector<double> impulse_response(const TransferFunction& g,
                                     std::size_t length);

/// y_i = sum_{j<=i} g_j u_{i-j} for each batch element of a single-channel
/// signal. Quadratic cost; meant for verification and short sequences.
Signal convolve_truncated(std::span<const double> g, const Signal& u);

/// G(e^{j 2 pi f}) at a normalized frequency f in cycles/sample.
std::complex<double> frequency_response(const TransferFunction& g, double f);

/// 20 log10 |G(e^{j 2 pi f})|.
double magnitude_db(const TransferFunction& g, double f);

/// Roots of A(q) viewed as a polynomial in z (the filter poles).
std::vector<std::complex<double>> poles(const TransferFunction& g);

/// Roots of B(q) viewed as a polynomial in z (the filter zeros, excluding
/// the ones at the origin contributed by n_k).
std::vector<std::complex<double>> zeros(const TransferFunction& g);

/// True when every pole lies strictly inside the unit circle.
bool is_stable(const TransferFunction& g);

/// Coefficients c_1..c_n of prod_i (1 - r_i z^{-1}) = 1 + c_1 z^{-1} + ...
/// Complex roots must come in conjugate pairs; the imaginary residue is
/// dropped.
std::vector<double> monic_from_roots(std::span<const std::complex<double>> roots);

/// Roots of c_0 + c_1 x + ... + c_n x^n (companion-matrix eigenvalues).
/// Leading zero coefficients are trimmed.
std::vector<std::complex<double>> polynomial_roots(
    std::span<const double> ascending);

#ifdef DYNONET_COUNT_MULTIPLICATIONS
/// Scalar multiplications performed by filter_series on this thread.
std::uint64_t multiplication_count() noexcept;
void reset_multiplication_count() noexcept;
#endif

}  // namespace dynonet
