#include "dynonet/pem.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fd_check.hpp"
#include "oracles.hpp"

namespace dynonet {
namespace {

Signal random_signal(std::mt19937_64& rng, std::size_t T) {
  std::normal_distribution<double> n(0.0, 1.0);
  Signal s(1, T, 1);
  for (double& v : s.flat()) v = n(rng);
  return s;
}

DynoNetModel zero_model() {
  DynoNetModel m;
  m.add_gblock(MimoGBlock({1, 1, 0, 0, 0}, {TransferFunction({0.0}, {}, 0)}));
  return m;
}

DynoNetModel small_wh(std::mt19937_64& rng) {
  return build_wh({2, 2, 1, 0, 4}, rng, {0.3});
}

void randomize_noise(PemModel& pem, std::mt19937_64& rng) {
  const auto f = oracle::random_stable(rng, 2, 2, 1, 0.7);
  std::vector<double> b = f.b;
  for (double& v : b) v *= 0.3;
  pem.set_noise_check(TransferFunction(b, f.a, 1));
}

TEST(PemModel, NoiseBlockStartsAtZero) {
  PemModel pem(zero_model());
  const auto h = pem.noise_check();
  EXPECT_EQ(h.n_k(), 1u);
  EXPECT_EQ(h.b(), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(h.a(), (std::vector<double>{0, 0}));
}

TEST(PemModel, SetNoiseCheckValidatesShape) {
  PemModel pem(zero_model());
  EXPECT_THROW(pem.set_noise_check(TransferFunction({1, 0, 0}, {0, 0}, 0)), std::invalid_argument);
  EXPECT_THROW(pem.set_noise_check(TransferFunction({1, 0}, {0, 0}, 1)), std::invalid_argument);
  EXPECT_NO_THROW(pem.set_noise_check(TransferFunction({1, 0, 0}, {0, 0}, 1)));
}

TEST(PredictionError, ZeroNoiseBlockGivesOutputError) {
  std::mt19937_64 rng(1);
  PemModel pem(small_wh(rng));
  const Signal u = random_signal(rng, 40), y = random_signal(rng, 40);
  const Signal eps = pem.prediction_error(u, y);
  const Signal m = pem.deterministic().simulate(u);
  for (std::size_t t = 0; t < 40; ++t) EXPECT_EQ(eps(0, t, 0), y(0, t, 0) - m(0, t, 0));
}

TEST(PredictionError, ZeroModelMatchesManualRecursion) {
  std::mt19937_64 rng(2);
  PemModel pem(zero_model(), 0, 1);
  // Hc = 0.4 q^-1 / (1 - 0.5 q^-1), so eps(t) = y(t) + h(t) with
  // h(t) = 0.5 h(t-1) + 0.4 y(t-1).
  pem.set_noise_check(TransferFunction({0.4}, {-0.5}, 1));
  const Signal y = random_signal(rng, 30);
  const Signal eps = pem.prediction_error(Signal(1, 30, 1), y);
  long double h = 0.0L;
  for (std::size_t t = 0; t < 30; ++t) {
    if (t > 0) h = 0.5L * h + 0.4L * y(0, t - 1, 0);
    EXPECT_NEAR(eps(0, t, 0), static_cast<double>(y(0, t, 0) + h), 1e-14);
  }
}

TEST(PredictionError, ExactModelGivesZero) {
  std::mt19937_64 rng(3);
  PemModel pem(small_wh(rng));
  randomize_noise(pem, rng);
  const Signal u = random_signal(rng, 50);
  const Signal y = pem.deterministic().simulate(u);
  const Signal eps = pem.prediction_error(u, y);
  for (double v : eps.flat()) EXPECT_EQ(v, 0.0);
}

TEST(PredictionError, TapeAndSignalVersionsAgree) {
  std::mt19937_64 rng(4);
  PemModel pem(small_wh(rng));
  randomize_noise(pem, rng);
  const Signal u = random_signal(rng, 50), y = random_signal(rng, 50);
  Tape tape;
  const Signal eps = tape.value(pem.prediction_error(tape, tape.constant(u), tape.constant(y)));
  EXPECT_EQ(eps, pem.prediction_error(u, y));
}

TEST(OneStepPredictor, ZeroNoiseBlockIsSimulation) {
  std::mt19937_64 rng(5);
  PemModel pem(small_wh(rng));
  const Signal u = random_signal(rng, 30), y = random_signal(rng, 30);
  const Signal y_hat = pem.one_step_predictor(u, y);
  const Signal m = pem.deterministic().simulate(u);
  for (std::size_t t = 0; t < 30; ++t) EXPECT_NEAR(y_hat(0, t, 0), m(0, t, 0), 1e-15);
}

// y_hat + eps reproduces y up to the rounding of one subtraction and one
// addition: |(y - e) + e - y| <= ulp(y) + ulp(e).
TEST(OneStepPredictor, PredictorPlusErrorIsOutput) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    PemModel pem(small_wh(rng));
    randomize_noise(pem, rng);
    const Signal u = random_signal(rng, 60), y = random_signal(rng, 60);
    const Signal eps = pem.prediction_error(u, y);
    const Signal y_hat = pem.one_step_predictor(u, y);
    for (std::size_t t = 0; t < 60; ++t) {
      const double tol = 2.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(y(0, t, 0)) + std::abs(eps(0, t, 0)));
      EXPECT_LE(std::abs(y_hat(0, t, 0) + eps(0, t, 0) - y(0, t, 0)), tol);
    }
  }
}

TEST(OneStepPredictor, DependsOnlyOnPastOutputs) {
  std::mt19937_64 rng(7);
  PemModel pem(small_wh(rng));
  randomize_noise(pem, rng);
  const Signal u = random_signal(rng, 40);
  Signal y = random_signal(rng, 40);
  const Signal before = pem.one_step_predictor(u, y);
  const std::size_t t0 = 17;
  y(0, t0, 0) += 5.0;
  const Signal after = pem.one_step_predictor(u, y);
  for (std::size_t t = 0; t < t0; ++t) EXPECT_EQ(after(0, t, 0), before(0, t, 0)) << t;
  // y(t0) cancels out of y_hat(t0) = y(t0) - eps(t0) up to rounding.
  EXPECT_NEAR(after(0, t0, 0), before(0, t0, 0),
              4.0 * std::numeric_limits<double>::epsilon() * (std::abs(y(0, t0, 0)) + 1.0));
  EXPECT_NE(after(0, t0 + 1, 0), before(0, t0 + 1, 0));
}

TEST(PemLoss, ZeroErrorGivesZero) {
  std::mt19937_64 rng(8);
  PemModel pem(small_wh(rng));
  const Signal u = random_signal(rng, 20);
  EXPECT_EQ(pem.pem_loss(u, pem.deterministic().simulate(u)), 0.0);
}

TEST(PemLoss, ConstantErrorGivesSquare) {
  PemModel pem(zero_model());
  EXPECT_DOUBLE_EQ(pem.pem_loss(Signal(1, 25, 1), Signal(1, 25, 1, 0.3)), 0.09);
}

TEST(PemLoss, EqualsMeanSquaredPredictionError) {
  std::mt19937_64 rng(9);
  PemModel pem(small_wh(rng));
  randomize_noise(pem, rng);
  const Signal u = random_signal(rng, 70), y = random_signal(rng, 70);
  long double acc = 0.0L;
  const Signal eps = pem.prediction_error(u, y);
  for (double e : eps.flat()) acc += static_cast<long double>(e) * e;
  EXPECT_NEAR(pem.pem_loss(u, y), static_cast<double>(acc / 70.0L), 1e-15);
  Tape tape;
  EXPECT_NEAR(tape.value(pem.pem_loss(tape, tape.constant(u), tape.constant(y))).item(),
              pem.pem_loss(u, y), 1e-15);
}

TEST(PemLoss, GradientsPassFiniteDifferences) {
  std::mt19937_64 rng(10);
  PemModel pem(small_wh(rng));
  randomize_noise(pem, rng);
  const Signal u = random_signal(rng, 64), y = random_signal(rng, 64);
  std::vector<ParameterStore*> stores{&pem.deterministic().parameters(), &pem.noise_parameters()};
  for (auto* s : stores) s->zero_grad();
  Tape tape;
  tape.backward(pem.pem_loss(tape, tape.constant(u), tape.constant(y)));
  const auto analytic = oracle::store_gradients(stores);
  const auto fd = oracle::store_finite_differences(stores, [&] { return pem.pem_loss(u, y); });
  EXPECT_LE(oracle::max_relative_error(analytic, fd), 1e-5);
  // The noise coefficients are the last five scalars.
  const std::size_t n = analytic.size();
  EXPECT_LE(oracle::max_relative_error(std::span(analytic).subspan(n - 5),
                                       std::span(fd).subspan(n - 5)),
            1e-5);
}

TEST(InverseNoiseFilter, ImpulseResponseLeadsWithOne) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    PemModel pem(zero_model(), trial % 4, (trial / 4) % 4);
    std::normal_distribution<double> n(0.0, 2.0);
    auto h = pem.noise_check();
    std::vector<double> b = h.b(), a = h.a();
    for (double& v : b) v = n(rng);
    for (double& v : a) v = 0.2 * n(rng);
    pem.set_noise_check(TransferFunction(b, a, 1));
    EXPECT_EQ(impulse_response(pem.inverse_noise_filter(), 4)[0], 1.0);
  }
}

TEST(EstimatedNoiseFilter, ZeroNoiseBlockIsFlat) {
  PemModel pem(zero_model());
  const auto h = pem.estimated_noise_filter();
  for (double f : {0.0, 0.1, 0.25, 0.5}) EXPECT_NEAR(magnitude_db(h, f), 0.0, 1e-14);
}

TEST(EstimatedNoiseFilter, RecoversKnownNoiseFilter) {
  // 1 + Hc = A_o / B_o for H_o = B_o / A_o, so Hc has denominator B_o and
  // q^-1 numerator A_o - B_o.
  PemModel pem(zero_model());
  pem.set_noise_check(TransferFunction({-1.901 + 1.568, 0.9409 - 0.902, 0.0}, {-1.568, 0.902}, 1));
  const auto h = pem.estimated_noise_filter();
  EXPECT_EQ(h.n_k(), 0u);
  ASSERT_GE(h.b().size(), 3u);
  EXPECT_NEAR(h.b()[0], 1.0, 1e-15);
  EXPECT_NEAR(h.b()[1], -1.568, 1e-15);
  EXPECT_NEAR(h.b()[2], 0.902, 1e-15);
  EXPECT_NEAR(h.a()[0], -1.901, 1e-15);
  EXPECT_NEAR(h.a()[1], 0.9409, 1e-15);
  for (std::size_t j = 2; j < h.a().size(); ++j) EXPECT_EQ(h.a()[j], 0.0);
  const TransferFunction ho({1.0, -1.568, 0.902}, {-1.901, 0.9409}, 0);
  for (double f = 0.0; f <= 0.5; f += 0.01) {
    EXPECT_NEAR(magnitude_db(h, f), magnitude_db(ho, f), 1e-9);
  }
  EXPECT_TRUE(pem.inverse_noise_filter_minimum_phase());
}

TEST(EstimatedNoiseFilter, DcGainIsReciprocalOfOnePlusHc) {
  PemModel pem(zero_model());
  pem.set_noise_check(TransferFunction({0.2, -0.1, 0.05}, {-0.3, 0.1}, 1));
  const double hc_dc = (0.2 - 0.1 + 0.05) / (1.0 - 0.3 + 0.1);
  EXPECT_NEAR(std::abs(frequency_response(pem.estimated_noise_filter(), 0.0)),
              1.0 / (1.0 + hc_dc), 1e-15);
}

TEST(EstimatedNoiseFilter, FlagsNonMinimumPhaseInverse) {
  PemModel pem(zero_model(), 0, 1);
  // 1 + Hc = (1 + 2.5 q^-1) / 1 has a root at -2.5.
  pem.set_noise_check(TransferFunction({2.5}, {0.0}, 1));
  EXPECT_FALSE(pem.inverse_noise_filter_minimum_phase());
}

}  // namespace
}  // namespace dynonet
