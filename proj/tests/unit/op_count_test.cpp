#include "dynonet/transfer_function.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace dynonet {
namespace {

std::uint64_t count_for(const TransferFunction& g, std::size_t T) {
  const Signal u(1, T, 1, 1.0);
  reset_multiplication_count();
  (void)filter_forward(g, u);
  return multiplication_count();
}

TEST(OpCount, BoundedByOrdersTimesLength) {
  std::mt19937_64 rng(1);
  for (std::size_t nb = 0; nb <= 6; ++nb) {
    for (std::size_t na = 0; na <= 6; ++na) {
      for (std::size_t nk : {0u, 1u, 3u}) {
        const auto f = oracle::random_stable(rng, nb, na, nk);
        const TransferFunction g(f.b, f.a, nk);
        for (std::size_t T : {1u, 5u, 64u, 1000u}) {
          EXPECT_LE(count_for(g, T), T * (nb + na + 1)) << nb << " " << na << " " << nk << " " << T;
        }
      }
    }
  }
}

TEST(OpCount, GrowsLinearlyWithLength) {
  const TransferFunction g({0.5, 0.2, 0.1}, {-0.3, 0.1}, 1);
  const auto c1 = count_for(g, 1000), c2 = count_for(g, 2000), c4 = count_for(g, 4000);
  EXPECT_EQ(c2 - c1, c4 - c2 - (c2 - c1));
  EXPECT_EQ(c2 - c1, 1000u * 5u);
}

}  // namespace
}  // namespace dynonet
