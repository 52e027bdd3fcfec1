#include "dynonet/transfer_function.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dynonet {

#ifdef DYNONET_COUNT_MULTIPLICATIONS
namespace {
thread_local std::uint64_t g_multiplications = 0;
}
std::uint64_t multiplication_count() noexcept { return g_multiplications; }
void reset_multiplication_count() noexcept { g_multiplications = 0; }
#endif

TransferFunction::TransferFunction(std::vector<double> b, std::vector<double> a,
                                   std::size_t n_k)
    : b_(std::move(b)), a_(std::move(a)), n_k_(n_k) {
  if (b_.empty()) {
    throw std::invalid_argument("TransferFunction: numerator needs at least b_0");
  }
}

TransferFunction TransferFunction::zeros(std::size_t n_b, std::size_t n_a,
                                         std::size_t n_k) {
  return {std::vector<double>(n_b + 1, 0.0), std::vector<double>(n_a, 0.0), n_k};
}

void filter_series(const TfView& g, std::span<const double> u,
                   std::span<double> y) {
  if (u.size() != y.size()) {
    throw ShapeError("filter_series: input length " + std::to_string(u.size()) +
                     " != output length " + std::to_string(y.size()));
  }
  if (g.b.empty()) throw std::invalid_argument("filter_series: empty numerator");
  const std::size_t T = u.size();
  const std::size_t nb = g.b.size();
  const std::size_t na = g.a.size();
  const std::size_t nk = g.n_k;
  const double* bp = g.b.data();
  const double* ap = g.a.data();
  const double* up = u.data();
  double* yp = y.data();

  // Start-up samples where some taps reach before t = 0. They use the same
  // pairing of partial sums as the steady state below, with the missing
  // history read as zero, so a signal filtered after k leading zeros gives
  // bit-identical samples to the unshifted one.
  const std::size_t warm = std::min(T, std::max(nk + nb - 1, na));
  auto u_at = [&](std::size_t t, std::size_t j) {
    return t >= nk + j ? up[t - nk - j] : 0.0;
  };
  auto y_at = [&](std::size_t t, std::size_t i) { return t >= i ? yp[t - i] : 0.0; };
  for (std::size_t t = 0; t < warm; ++t) {
    double n0 = 0.0, n1 = 0.0;
    std::size_t j = 0;
    for (; j + 1 < nb; j += 2) {
      n0 += bp[j] * u_at(t, j);
      n1 += bp[j + 1] * u_at(t, j + 1);
    }
    if (j < nb) n0 += bp[j] * u_at(t, j);
    double d0 = 0.0, d1 = 0.0;
    std::size_t i = 1;
    for (; i + 1 <= na; i += 2) {
      d0 += ap[i - 1] * y_at(t, i);
      d1 += ap[i] * y_at(t, i + 1);
    }
    if (i <= na) d0 += ap[i - 1] * y_at(t, i);
#ifdef DYNONET_COUNT_MULTIPLICATIONS
    g_multiplications += (t >= nk ? std::min(nb, t - nk + 1) : 0) + std::min(na, t);
#endif
    const double acc = (n0 + n1) - (d0 + d1);
    if (!std::isfinite(acc)) throw DivergenceError("filter output diverged", t);
    yp[t] = acc;
  }

  // Steady state. Two partial sums per polynomial shorten the dependency
  // chain; the summation order is fixed, so results stay deterministic.
  for (std::size_t t = warm; t < T; ++t) {
    const double* ut = up + (t - nk);
    double n0 = 0.0, n1 = 0.0;
    std::size_t j = 0;
    for (; j + 1 < nb; j += 2) {
      n0 += bp[j] * ut[-static_cast<std::ptrdiff_t>(j)];
      n1 += bp[j + 1] * ut[-static_cast<std::ptrdiff_t>(j + 1)];
    }
    if (j < nb) n0 += bp[j] * ut[-static_cast<std::ptrdiff_t>(j)];
    double d0 = 0.0, d1 = 0.0;
    const double* yt = yp + t;
    std::size_t i = 1;
    for (; i + 1 <= na; i += 2) {
      d0 += ap[i - 1] * yt[-static_cast<std::ptrdiff_t>(i)];
      d1 += ap[i] * yt[-static_cast<std::ptrdiff_t>(i + 1)];
    }
    if (i <= na) d0 += ap[i - 1] * yt[-static_cast<std::ptrdiff_t>(i)];
#ifdef DYNONET_COUNT_MULTIPLICATIONS
    g_multiplications += nb + na;
#endif
    const double acc = (n0 + n1) - (d0 + d1);
    if (!std::isfinite(acc)) throw DivergenceError("filter output diverged", t);
    yp[t] = acc;
  }
}

Signal filter_forward(const TfView& g, const Signal& u) {
  if (u.channels() != 1) {
    throw ShapeError("filter_forward: expected a single-channel signal, got " +
                     u.shape_string());
  }
  Signal y(u.batch(), u.length(), 1);
  for (std::size_t b = 0; b < u.batch(); ++b) {
    filter_series(g, u.series(b, 0), y.series(b, 0));
  }
  return y;
}

Signal filter_forward(const TransferFunction& g, const Signal& u) {
  return filter_forward(g.view(), u);
}

std::vector<double> impulse_response(const TransferFunction& g,
                                     std::size_t length) {
  std::vector<double> delta(length, 0.0);
  if (length > 0) delta[0] = 1.0;
  std::vector<double> out(length);
  filter_series(g.view(), delta, out);
  return out;
}

Signal convolve_truncated(std::span<const double> g, const Signal& u) {
  if (u.channels() != 1) {
    throw ShapeError("convolve_truncated: expected a single-channel signal");
  }
  if (g.size() != u.length()) {
    throw ShapeError("convolve_truncated: impulse response length " +
                     std::to_string(g.size()) + " != signal length " +
                     std::to_string(u.length()));
  }
  const std::size_t T = u.length();
  Signal y(u.batch(), T, 1);
  for (std::size_t b = 0; b < u.batch(); ++b) {
    auto in = u.series(b, 0);
    auto out = y.series(b, 0);
    for (std::size_t i = 0; i < T; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += g[j] * in[i - j];
      out[i] = acc;
    }
  }
  return y;
}

std::complex<double> frequency_response(const TransferFunction& g, double f) {
  const double w = 2.0 * std::numbers::pi * f;
  const std::complex<double> zinv = std::polar(1.0, -w);
  std::complex<double> num = 0.0;
  std::complex<double> power = std::pow(zinv, static_cast<double>(g.n_k()));
  for (double bj : g.b()) {
    num += bj * power;
    power *= zinv;
  }
  std::complex<double> den = 1.0;
  power = zinv;
  for (double aj : g.a()) {
    den += aj * power;
    power *= zinv;
  }
  return num / den;
}

double magnitude_db(const TransferFunction& g, double f) {
  return 20.0 * std::log10(std::abs(frequency_response(g, f)));
}

std::vector<std::complex<double>> polynomial_roots(
    std::span<const double> ascending) {
  std::size_t n = ascending.size();
  while (n > 0 && ascending[n - 1] == 0.0) --n;
  if (n <= 1) return {};
  const std::size_t degree = n - 1;
  const double lead = ascending[degree];
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (std::size_t i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (std::size_t i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -ascending[i] / lead;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> roots(degree);
  for (std::size_t i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()[i];
  return roots;
}

std::vector<std::complex<double>> poles(const TransferFunction& g) {
  // z^{n_a} A(z^{-1}) = z^{n_a} + a_1 z^{n_a - 1} + ... + a_{n_a}
  std::vector<double> ascending(g.a().rbegin(), g.a().rend());
  ascending.push_back(1.0);
  return polynomial_roots(ascending);
}

std::vector<std::complex<double>> zeros(const TransferFunction& g) {
  std::vector<double> ascending(g.b().rbegin(), g.b().rend());
  // Vanishing leading b_j are extra delays; polynomial_roots trims them.
  return polynomial_roots(ascending);
}

bool is_stable(const TransferFunction& g) {
  for (const auto& p : poles(g)) {
    if (std::abs(p) >= 1.0) return false;
  }
  return true;
}

std::vector<double> monic_from_roots(
    std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> coeffs{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i] += coeffs[i];
      next[i + 1] -= r * coeffs[i];
    }
    coeffs = std::move(next);
  }
  std::vector<double> out(coeffs.size() - 1);
  for (std::size_t i = 1; i < coeffs.size(); ++i) out[i - 1] = coeffs[i].real();
  return out;
}

}  // namespace dynonet
