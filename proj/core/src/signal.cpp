#include "dynonet/signal.hpp"

#include <cmath>

namespace dynonet {

Signal flip(const Signal& x) {
  Signal out(x.batch(), x.length(), x.channels());
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      auto src = x.series(b, c);
      std::reverse_copy(src.begin(), src.end(), out.series(b, c).begin());
    }
  }
  return out;
}

Signal select_channel(const Signal& x, std::size_t channel) {
  if (channel >= x.channels()) {
    throw ShapeError("select_channel: channel " + std::to_string(channel) +
                     " out of range for shape " + x.shape_string());
  }
  Signal out(x.batch(), x.length(), 1);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    auto src = x.series(b, channel);
    std::copy(src.begin(), src.end(), out.series(b, 0).begin());
  }
  return out;
}

Signal concat_batch(std::span<const Signal> parts) {
  if (parts.empty()) return {};
  std::size_t batch = 0;
  for (const auto& p : parts) {
    if (p.length() != parts.front().length() ||
        p.channels() != parts.front().channels()) {
      throw ShapeError("concat_batch: incompatible shapes " +
                       parts.front().shape_string() + " and " +
                       p.shape_string());
    }
    batch += p.batch();
  }
  Signal out(batch, parts.front().length(), parts.front().channels());
  auto dst = out.flat().begin();
  for (const auto& p : parts) dst = std::copy(p.flat().begin(), p.flat().end(), dst);
  return out;
}

bool all_finite(const Signal& x) noexcept {
  for (double v : x.flat()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace dynonet
