#include "dynonet/tf_grad.hpp"

#include <algorithm>

namespace dynonet {

namespace {

constexpr double kOne[] = {1.0};
constexpr double kMinusOne[] = {-1.0};

void require_single_channel(const Signal& s, const char* context) {
  if (s.channels() != 1) {
    throw ShapeError(std::string(context) +
                     ": expected a single-channel signal, got " +
                     s.shape_string());
  }
}

}  // namespace

namespace detail {

void accumulate_grad_b(std::span<const double> y_bar,
                       std::span<const double> sigma_b0,
                       std::span<double> b_bar) {
  const std::size_t T = y_bar.size();
  for (std::size_t j = 0; j < b_bar.size() && j < T; ++j) {
    double acc = 0.0;
    for (std::size_t t = j; t < T; ++t) acc += y_bar[t] * sigma_b0[t - j];
    b_bar[j] += acc;
  }
}

void accumulate_grad_a(std::span<const double> y_bar,
                       std::span<const double> sigma_a1,
                       std::span<double> a_bar) {
  const std::size_t T = y_bar.size();
  // a_bar[k] holds the adjoint of a_{k+1}; its shift is k samples.
  for (std::size_t k = 0; k < a_bar.size() && k < T; ++k) {
    double acc = 0.0;
    for (std::size_t t = k; t < T; ++t) acc += y_bar[t] * sigma_a1[t - k];
    a_bar[k] += acc;
  }
}

void accumulate_grad_u(const TfView& g, std::span<const double> y_bar,
                       std::span<double> u_bar, std::span<double> scratch_in,
                       std::span<double> scratch_out) {
  std::reverse_copy(y_bar.begin(), y_bar.end(), scratch_in.begin());
  filter_series(g, scratch_in, scratch_out);
  const std::size_t T = y_bar.size();
  for (std::size_t t = 0; t < T; ++t) u_bar[t] += scratch_out[T - 1 - t];
}

}  // namespace detail

Signal sens_b0(const TfView& g, const Signal& u) {
  return filter_forward(TfView{kOne, g.a, g.n_k}, u);
}

Signal sens_b0(const TransferFunction& g, const Signal& u) {
  return sens_b0(g.view(), u);
}

Signal sens_a1(const TfView& g, const Signal& y) {
  return filter_forward(TfView{kMinusOne, g.a, 1}, y);
}

Signal sens_a1(const TransferFunction& g, const Signal& y) {
  return sens_a1(g.view(), y);
}

std::vector<double> grad_b(const Signal& y_bar, const Signal& sigma_b0,
                           std::size_t n_b) {
  require_same_shape(y_bar, sigma_b0, "grad_b");
  require_single_channel(y_bar, "grad_b");
  std::vector<double> out(n_b + 1, 0.0);
  for (std::size_t b = 0; b < y_bar.batch(); ++b) {
    detail::accumulate_grad_b(y_bar.series(b, 0), sigma_b0.series(b, 0), out);
  }
  return out;
}

std::vector<double> grad_a(const Signal& y_bar, const Signal& sigma_a1,
                           std::size_t n_a) {
  require_same_shape(y_bar, sigma_a1, "grad_a");
  require_single_channel(y_bar, "grad_a");
  std::vector<double> out(n_a, 0.0);
  for (std::size_t b = 0; b < y_bar.batch(); ++b) {
    detail::accumulate_grad_a(y_bar.series(b, 0), sigma_a1.series(b, 0), out);
  }
  return out;
}

Signal grad_u(const TfView& g, const Signal& y_bar) {
  require_single_channel(y_bar, "grad_u");
  return flip(filter_forward(g, flip(y_bar)));
}

Signal grad_u(const TransferFunction& g, const Signal& y_bar) {
  return grad_u(g.view(), y_bar);
}

GBlockGradients gblock_backward(const TfView& g, const Signal& u,
                                const Signal& y, const Signal& y_bar) {
  require_same_shape(u, y, "gblock_backward");
  require_same_shape(y, y_bar, "gblock_backward");
  GBlockGradients out;
  out.b_bar = grad_b(y_bar, sens_b0(g, u), g.b.size() - 1);
  out.a_bar = grad_a(y_bar, sens_a1(g, y), g.a.size());
  out.u_bar = grad_u(g, y_bar);
  return out;
}

}  // namespace dynonet
