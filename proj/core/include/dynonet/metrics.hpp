#pragma once

#include <cstddef>
#include <vector>

#include "dynonet/signal.hpp"

namespace dynonet {

/// 100 (1 - ||y - y_sim|| / ||y - mean(y)||), over every sample of both
/// signals. Returns -inf for a constant `y` unless y_sim matches exactly
/// (then 100).
double fit_index(const Signal& y, const Signal& y_sim);

/// sqrt(mean((y - y_sim)^2)).
double rmse(const Signal& y, const Signal& y_sim);

/// Normalized sample autocorrelation r_k = sum_t x_t x_{t+k} / sum_t x_t^2
/// for k = 0..max_lag of a single series (mean removed first).
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

/// Autocorrelation pooled over every (batch, channel) series.
std::vector<double> autocorrelation(const Signal& x, std::size_t max_lag);

/// Population mean and standard deviation over every sample.
double mean(const Signal& x);
double standard_deviation(const Signal& x);

}  // namespace dynonet
