#include "dynonet/metrics.hpp"

#include <cmath>
#include <limits>

namespace dynonet {

double mean(const Signal& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x.flat()) acc += v;
  return acc / static_cast<double>(x.size());
}

double standard_deviation(const Signal& x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x.flat()) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double fit_index(const Signal& y, const Signal& y_sim) {
  require_same_shape(y, y_sim, "fit_index");
  const double m = mean(y);
  double err = 0.0;
  double spread = 0.0;
  auto a = y.flat();
  auto b = y_sim.flat();
  for (std::size_t i = 0; i < a.size(); ++i) {
    err += (a[i] - b[i]) * (a[i] - b[i]);
    spread += (a[i] - m) * (a[i] - m);
  }
  if (spread == 0.0) {
    return err == 0.0 ? 100.0 : -std::numeric_limits<double>::infinity();
  }
  return 100.0 * (1.0 - std::sqrt(err) / std::sqrt(spread));
}

double rmse(const Signal& y, const Signal& y_sim) {
  require_same_shape(y, y_sim, "rmse");
  if (y.empty()) return 0.0;
  double err = 0.0;
  auto a = y.flat();
  auto b = y_sim.flat();
  for (std::size_t i = 0; i < a.size(); ++i) err += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(err / static_cast<double>(a.size()));
}

namespace {

void accumulate_autocorrelation(std::span<const double> x, std::size_t max_lag,
                                std::vector<double>& acc) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  for (std::size_t k = 0; k <= max_lag && k < x.size(); ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < x.size(); ++t) s += (x[t] - m) * (x[t + k] - m);
    acc[k] += s;
  }
}

void normalize(std::vector<double>& acc) {
  const double r0 = acc[0];
  for (double& v : acc) v = r0 > 0.0 ? v / r0 : 0.0;
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  std::vector<double> acc(max_lag + 1, 0.0);
  if (x.empty()) return acc;
  accumulate_autocorrelation(x, max_lag, acc);
  normalize(acc);
  return acc;
}

std::vector<double> autocorrelation(const Signal& x, std::size_t max_lag) {
  std::vector<double> acc(max_lag + 1, 0.0);
  if (x.empty()) return acc;
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      accumulate_autocorrelation(x.series(b, c), max_lag, acc);
    }
  }
  normalize(acc);
  return acc;
}

}  // namespace dynonet
