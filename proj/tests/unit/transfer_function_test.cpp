#include "dynonet/transfer_function.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

namespace dynonet {
namespace {

std::vector<double> filtered(const TransferFunction& g, std::initializer_list<double> u) {
  const Signal y = filter_forward(g, Signal::from_series(u));
  return {y.flat().begin(), y.flat().end()};
}

Signal random_signal(std::mt19937_64& rng, std::size_t T, std::size_t batch = 1) {
  std::normal_distribution<double> n(0.0, 1.0);
  Signal s(batch, T, 1);
  for (double& v : s.flat()) v = n(rng);
  return s;
}

TransferFunction to_tf(const oracle::Filter& f) { return {f.b, f.a, f.nk}; }

TEST(FilterForward, IdentityFilter) {
  EXPECT_EQ(filtered({{1.0}, {}, 0}, {1, 2, 3}), (std::vector<double>{1, 2, 3}));
}

TEST(FilterForward, UnitDelayStartsFromRest) {
  EXPECT_EQ(filtered({{1.0}, {}, 1}, {1, 2, 3}), (std::vector<double>{0, 1, 2}));
}

TEST(FilterForward, FirstOrderRecursionIsGeometric) {
  EXPECT_EQ(filtered({{1.0}, {-0.5}, 0}, {1, 0, 0, 0}),
            (std::vector<double>{1, 0.5, 0.25, 0.125}));
}

TEST(FilterForward, DelayLongerThanSignalGivesZeros) {
  EXPECT_EQ(filtered({{1.0, 2.0}, {}, 5}, {1, 2, 3}), (std::vector<double>{0, 0, 0}));
}

TEST(FilterForward, MatchesLongDoubleRecursion) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = oracle::random_stable(rng, trial % 9, (trial * 5) % 9, trial % 3);
    const Signal u = random_signal(rng, 100);
    const Signal y = filter_forward(to_tf(f), u);
    const auto ref = oracle::narrow(oracle::filter(oracle::widen(f.b), oracle::widen(f.a),
                                                   f.nk, oracle::widen(u.flat())));
    EXPECT_LE(oracle::relative_error(y.flat(), ref), 1e-12) << "trial " << trial;
  }
}

TEST(FilterForward, MatchesConvolutionWithImpulseResponse) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = oracle::random_stable(rng, 3, 4, trial % 2);
    const auto g = to_tf(f);
    const Signal u = random_signal(rng, 64);
    const Signal y = filter_forward(g, u);
    const Signal yc = convolve_truncated(impulse_response(g, 64), u);
    EXPECT_LE(oracle::relative_error(y.flat(), yc.flat()), 1e-12);
  }
}

TEST(FilterForward, BatchElementsAreIndependent) {
  std::mt19937_64 rng(13);
  const auto g = to_tf(oracle::random_stable(rng, 2, 2, 1));
  const Signal u = random_signal(rng, 40, 3);
  const Signal y = filter_forward(g, u);
  for (std::size_t b = 0; b < 3; ++b) {
    const Signal single = filter_forward(g, Signal::from_series(u.series(b, 0)));
    EXPECT_TRUE(std::ranges::equal(single.flat(), y.series(b, 0)));
  }
}

TEST(FilterForward, RejectsMultiChannelInput) {
  EXPECT_THROW(filter_forward(TransferFunction({1.0}, {}, 0), Signal(1, 4, 2)), ShapeError);
}

TEST(FilterForward, DivergenceReportsFirstNonFiniteIndex) {
  // Pole at 1e200: y(t) = 1e200^t overflows at t = 2.
  const TransferFunction g({1.0}, {-1e200}, 0);
  try {
    filter_forward(g, Signal::from_series({1, 0, 0, 0, 0}));
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(FilterForward, NonFiniteInputIsReportedAsDivergence) {
  const TransferFunction g({1.0}, {}, 0);
  EXPECT_THROW(filter_forward(g, Signal::from_series({0, NAN, 0})), DivergenceError);
}

TEST(FilterForward, Linearity) {
  std::mt19937_64 rng(14);
  const auto g = to_tf(oracle::random_stable(rng, 4, 4, 0));
  const Signal u1 = random_signal(rng, 80), u2 = random_signal(rng, 80);
  const double alpha = 0.7, beta = -1.9;
  Signal mix(1, 80, 1);
  for (std::size_t t = 0; t < 80; ++t) mix(0, t, 0) = alpha * u1(0, t, 0) + beta * u2(0, t, 0);
  const Signal y = filter_forward(g, mix);
  const Signal y1 = filter_forward(g, u1), y2 = filter_forward(g, u2);
  std::vector<double> combo(80);
  for (std::size_t t = 0; t < 80; ++t) combo[t] = alpha * y1(0, t, 0) + beta * y2(0, t, 0);
  EXPECT_LE(oracle::relative_error(y.flat(), combo), 1e-13);
}

TEST(FilterForward, TimeInvarianceUnderZeroHistory) {
  std::mt19937_64 rng(15);
  const auto g = to_tf(oracle::random_stable(rng, 3, 5, 1));
  const Signal u = random_signal(rng, 50);
  const std::size_t k = 7;
  Signal shifted(1, 50, 1);
  for (std::size_t t = k; t < 50; ++t) shifted(0, t, 0) = u(0, t - k, 0);
  const Signal y = filter_forward(g, u), ys = filter_forward(g, shifted);
  for (std::size_t t = 0; t < 50; ++t) {
    const double expected = t < k ? 0.0 : y(0, t - k, 0);
    EXPECT_NEAR(ys(0, t, 0), expected, 1e-12 * (1.0 + std::abs(expected)));
  }
}

TEST(FilterForward, DelayEquivalentToLeadingZeros) {
  std::mt19937_64 rng(16);
  for (std::size_t nk = 0; nk < 4; ++nk) {
    const auto f = oracle::random_stable(rng, 3, 2, nk);
    std::vector<double> padded(nk, 0.0);
    padded.insert(padded.end(), f.b.begin(), f.b.end());
    const Signal u = random_signal(rng, 30);
    const Signal y1 = filter_forward(to_tf(f), u);
    const Signal y2 = filter_forward(TransferFunction(padded, f.a, 0), u);
    EXPECT_LE(oracle::relative_error(y1.flat(), y2.flat()), 1e-14);
  }
}

TEST(ImpulseResponse, Examples) {
  EXPECT_EQ(impulse_response({{1.0}, {}, 0}, 4), (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(impulse_response({{1.0}, {-0.5}, 0}, 4),
            (std::vector<double>{1, 0.5, 0.25, 0.125}));
}

TEST(ImpulseResponse, EqualsFilteredDelta) {
  const TransferFunction g({0.5, 0.3}, {-0.2}, 0);
  for (std::size_t T : {1u, 2u, 9u}) {
    std::vector<double> delta(T, 0.0);
    delta[0] = 1.0;
    const Signal y = filter_forward(g, Signal::from_series(delta));
    const auto h = impulse_response(g, T);
    EXPECT_TRUE(std::ranges::equal(h, y.flat()));
  }
}

TEST(ImpulseResponse, LeadingSampleIsB0WithoutDelay) {
  std::mt19937_64 rng(17);
  const auto f = oracle::random_stable(rng, 4, 6, 0);
  EXPECT_EQ(impulse_response(to_tf(f), 5)[0], f.b[0]);
}

TEST(ConvolveTruncated, Examples) {
  const Signal u = Signal::from_series({2.0, 3.0, 5.0});
  const Signal y1 = convolve_truncated(std::vector<double>{1, 0, 0}, u);
  const Signal y2 = convolve_truncated(std::vector<double>{0, 1, 0}, u);
  EXPECT_TRUE(std::ranges::equal(y1.flat(), std::vector<double>{2, 3, 5}));
  EXPECT_TRUE(std::ranges::equal(y2.flat(), std::vector<double>{0, 2, 3}));
}

TEST(ConvolveTruncated, MatchesDoubleLoop) {
  std::mt19937_64 rng(18);
  const Signal u = random_signal(rng, 32);
  const Signal g = random_signal(rng, 32);
  const Signal y = convolve_truncated(g.flat(), u);
  const auto ref = oracle::narrow(oracle::convolve(oracle::widen(g.flat()), oracle::widen(u.flat())));
  EXPECT_LE(oracle::relative_error(y.flat(), ref), 1e-14);
}

TEST(ConvolveTruncated, RejectsLengthMismatch) {
  EXPECT_THROW(convolve_truncated(std::vector<double>{1, 0}, Signal::from_series({1, 2, 3})),
               ShapeError);
}

TEST(TransferFunction, RejectsEmptyNumerator) {
  EXPECT_THROW(TransferFunction({}, {0.1}, 0), std::invalid_argument);
}

TEST(TransferFunction, OrdersFollowStorage) {
  const auto g = TransferFunction::zeros(3, 2, 1);
  EXPECT_EQ(g.n_b(), 3u);
  EXPECT_EQ(g.n_a(), 2u);
  EXPECT_EQ(g.b().size(), 4u);
  EXPECT_EQ(g.a().size(), 2u);
}

TEST(FrequencyResponse, MatchesPolynomialEvaluation) {
  const TransferFunction g({1.0, -1.568, 0.902}, {-1.901, 0.9409}, 0);
  for (double f : {0.0, 0.01, 0.05, 0.2, 0.5}) {
    const std::complex<long double> z =
        std::polar(1.0L, -2.0L * 3.14159265358979323846L * static_cast<long double>(f));
    const auto num = 1.0L - 1.568L * z + 0.902L * z * z;
    const auto den = 1.0L - 1.901L * z + 0.9409L * z * z;
    const double ref = static_cast<double>(std::abs(num / den));
    EXPECT_NEAR(std::abs(frequency_response(g, f)), ref, 1e-12 * ref);
    EXPECT_NEAR(magnitude_db(g, f), 20.0 * std::log10(ref), 1e-10);
  }
}

TEST(FrequencyResponse, DelayOnlyChangesPhase) {
  const TransferFunction g0({0.4, 0.2}, {-0.3}, 0), g3({0.4, 0.2}, {-0.3}, 3);
  for (double f : {0.03, 0.17, 0.41}) {
    EXPECT_NEAR(std::abs(frequency_response(g0, f)), std::abs(frequency_response(g3, f)), 1e-14);
  }
}

TEST(Roots, PolesOfKnownSecondOrderSystem) {
  const std::vector<std::complex<double>> roots{std::polar(0.9, 0.5), std::polar(0.9, -0.5)};
  const TransferFunction g({1.0}, monic_from_roots(roots), 0);
  const auto p = poles(g);
  ASSERT_EQ(p.size(), 2u);
  for (const auto& r : p) EXPECT_NEAR(std::abs(r), 0.9, 1e-12);
  EXPECT_TRUE(is_stable(g));
  EXPECT_FALSE(is_stable(TransferFunction({1.0}, {-1.5}, 0)));
  EXPECT_TRUE(is_stable(TransferFunction({1.0}, {}, 0)));
}

TEST(Roots, ZerosIgnoreDelay) {
  const TransferFunction g({1.0, -0.5}, {}, 2);
  const auto z = zeros(g);
  ASSERT_EQ(z.size(), 1u);
  EXPECT_NEAR(z[0].real(), 0.5, 1e-14);
}

TEST(Roots, MonicFromRootsMatchesExpansion) {
  const std::vector<std::complex<double>> roots{{0.3, 0.2}, {0.3, -0.2}, {-0.7, 0.0}};
  const auto c = monic_from_roots(roots);
  const auto ref = oracle::expand_roots(roots);
  ASSERT_EQ(c.size(), ref.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-15);
}

}  // namespace
}  // namespace dynonet
