#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynonet {

/// Raised when connected quantities disagree in shape or length.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a recursion produces a non-finite value. `index()` is the
/// first offending time step.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t index)
      : std::runtime_error(what + " (first non-finite sample at t=" +
                           std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Real-valued time series of logical shape (batch, T, channels).
///
/// Samples are stored channel-major so every (batch, channel) series is a
/// contiguous span of length T, which is what the filters iterate over.
/// Values before t = 0 are taken to be zero everywhere in the library.
class Signal {
 public:
  Signal() = default;
  Signal(std::size_t batch, std::size_t length, std::size_t channels,
         double fill = 0.0)
      : batch_(batch),
        length_(length),
        channels_(channels),
        data_(batch * length * channels, fill) {}

  /// Single-batch, single-channel series.
  static Signal from_series(std::span<const double> values) {
    Signal s(1, values.size(), 1);
    std::copy(values.begin(), values.end(), s.data_.begin());
    return s;
  }
  static Signal from_series(std::initializer_list<double> values) {
    return from_series(std::span<const double>(values.begin(), values.size()));
  }
  static Signal scalar(double value) { return Signal(1, 1, 1, value); }

  std::size_t batch() const noexcept { return batch_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool same_shape(const Signal& other) const noexcept {
    return batch_ == other.batch_ && length_ == other.length_ &&
           channels_ == other.channels_;
  }

  double& operator()(std::size_t b, std::size_t t, std::size_t c) {
    return data_[(b * channels_ + c) * length_ + t];
  }
  double operator()(std::size_t b, std::size_t t, std::size_t c) const {
    return data_[(b * channels_ + c) * length_ + t];
  }

  std::span<double> series(std::size_t b, std::size_t c) {
    return {data_.data() + (b * channels_ + c) * length_, length_};
  }
  std::span<const double> series(std::size_t b, std::size_t c) const {
    return {data_.data() + (b * channels_ + c) * length_, length_};
  }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  /// Value of a 1x1x1 signal.
  double item() const {
    if (data_.size() != 1) throw ShapeError("item() requires a scalar signal");
    return data_.front();
  }

  std::string shape_string() const {
    return "(" + std::to_string(batch_) + ", " + std::to_string(length_) +
           ", " + std::to_string(channels_) + ")";
  }

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  std::size_t batch_ = 0;
  std::size_t length_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

/// Throws ShapeError unless `a` and `b` have identical shapes.
inline void require_same_shape(const Signal& a, const Signal& b,
                               const char* context) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(context) + ": shape mismatch " +
                     a.shape_string() + " vs " + b.shape_string());
  }
}

/// Time reversal of every (batch, channel) series: out(t) = x(T - 1 - t).
Signal flip(const Signal& x);

/// Extracts one channel as a (batch, T, 1) signal.
Signal select_channel(const Signal& x, std::size_t channel);

/// Concatenates signals along the batch axis. All must share T and channels.
Signal concat_batch(std::span<const Signal> parts);

/// True when every sample is finite.
bool all_finite(const Signal& x) noexcept;

}  // namespace dynonet
