// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails. `--only N` runs a single one.

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dynonet/datagen.hpp"
#include "dynonet/fitting.hpp"
#include "dynonet/metrics.hpp"
#include "dynonet/pem.hpp"
#include "dynonet/quantized.hpp"
#include "dynonet/tf_grad.hpp"
#include "dynonet/transfer_function.hpp"
#include "oracles.hpp"

namespace {

using namespace dynonet;
using Clock = std::chrono::steady_clock;

// Tolerances, pinned here and nowhere else.
constexpr double kGradientTol = 1e-5;
constexpr double kGradientRuntimeS = 60.0;
constexpr double kFlipTol = 1e-10;
constexpr double kConvolutionTol = 1e-10;
constexpr double kNormalizationTol = 1e-12;
constexpr double kMonteCarloSe = 3.0;
constexpr double kWhFitMin = 90.0;
constexpr double kWhNoiseDbTol = 3.0;
constexpr std::size_t kWhAcfLags = 20;
constexpr double kPwhFitMin = 85.0;
constexpr double kPwhSigmaRelTol = 0.25;
constexpr double kLeastSquaresTol = 1e-3;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Signal to_signal(const std::vector<double>& x) { return Signal::from_series(x); }

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

// 1. Analytic G-block adjoints against central differences of the long
// double reference filter, on the scalar loss L = sum_t w_t y_t.
Outcome gradient_suite() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> order(0, 8), delay(0, 2);
  const std::size_t lengths[] = {8, 32, 128};
  double worst_b = 0.0, worst_a = 0.0, worst_u = 0.0;
  constexpr int kCases = 240;
  for (int k = 0; k < kCases; ++k) {
    const std::size_t T = lengths[k % 3];
    const auto f = oracle::random_stable(rng, order(rng), order(rng), delay(rng));
    const auto u = gaussian(rng, T), w = gaussian(rng, T);
    const TransferFunction g(f.b, f.a, f.nk);
    const Signal us = to_signal(u);
    const Signal y = filter_forward(g, us);
    const auto grads = gblock_backward(g.view(), us, y, to_signal(w));

    const auto wl = oracle::widen(w);
    auto loss = [&](const std::vector<double>& b, const std::vector<double>& a,
                    const std::vector<double>& x) {
      return oracle::dot(wl, oracle::filter(oracle::widen(b), oracle::widen(a), f.nk,
                                            oracle::widen(x)));
    };
    const auto fd_b = oracle::central_difference(
        [&](const std::vector<double>& b) { return loss(b, f.a, u); }, f.b, 1e-6);
    const auto fd_a = oracle::central_difference(
        [&](const std::vector<double>& a) { return loss(f.b, a, u); }, f.a, 1e-6);
    const auto fd_u = oracle::central_difference(
        [&](const std::vector<double>& x) { return loss(f.b, f.a, x); }, u, 1e-6);
    worst_b = std::max(worst_b, oracle::max_relative_error(grads.b_bar, fd_b));
    worst_a = std::max(worst_a, oracle::max_relative_error(grads.a_bar, fd_a));
    worst_u = std::max(worst_u, oracle::max_relative_error(grads.u_bar.flat(), fd_u));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const double worst = std::max({worst_b, worst_a, worst_u});
  return {worst <= kGradientTol && secs < kGradientRuntimeS,
          fmt("%d blocks, max rel err b %.2e a %.2e u %.2e (tol %.0e), %.1f s (limit %.0f s)",
              kCases, worst_b, worst_a, worst_u, kGradientTol, secs, kGradientRuntimeS)};
}

// 2. Reverse-time filtering against the explicit cross-correlation.
Outcome flip_trick() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> order(0, 8), delay(0, 3), length(1, 256);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto f = oracle::random_stable(rng, order(rng), order(rng), delay(rng));
    const auto y_bar = gaussian(rng, length(rng));
    const Signal u_bar = grad_u(TransferFunction(f.b, f.a, f.nk), to_signal(y_bar));
    const auto ref = oracle::narrow(oracle::input_adjoint(
        oracle::widen(f.b), oracle::widen(f.a), f.nk, oracle::widen(y_bar)));
    worst = std::max(worst, oracle::relative_error(u_bar.flat(), ref));
  }
  return {worst <= kFlipTol, fmt("100 cases, max rel err %.2e (tol %.0e)", worst, kFlipTol)};
}

// 3. Recursive filtering against convolution with the impulse response.
Outcome convolution() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> order(0, 8), delay(0, 3), length(1, 512);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto f = oracle::random_stable(rng, order(rng), order(rng), delay(rng));
    const auto u = gaussian(rng, length(rng));
    const Signal y = filter_forward(TransferFunction(f.b, f.a, f.nk), to_signal(u));
    const auto g = oracle::impulse_response(oracle::widen(f.b), oracle::widen(f.a), f.nk,
                                            u.size());
    const auto ref = oracle::narrow(oracle::convolve(g, oracle::widen(u)));
    worst = std::max(worst, oracle::relative_error(y.flat(), ref));
  }
  return {worst <= kConvolutionTol,
          fmt("100 cases, max rel err %.2e (tol %.0e)", worst, kConvolutionTol)};
}

Quantizer random_quantizer(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> bins(2, 64);
  std::uniform_real_distribution<double> gap(0.01, 1.0), start(-3.0, 0.0);
  std::vector<double> q{start(rng)};
  const std::size_t K = bins(rng);
  while (q.size() < K + 1) q.push_back(q.back() + gap(rng));
  return Quantizer(q);
}

// 4. Bin probabilities sum to one; spot checks against simulation.
Outcome likelihood_normalization() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> y_dist(-5.0, 5.0), log_sigma(std::log(1e-3),
                                                                       std::log(3.0));
  double worst_sum = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Quantizer qz = random_quantizer(rng);
    const double y = y_dist(rng), ls = log_sigma(rng);
    double total = 0.0;
    for (int m = 0; m < static_cast<int>(qz.bins()); ++m) {
      total += std::exp(bin_log_likelihood(y, m, ls, qz).value);
    }
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
  }

  constexpr std::size_t kDraws = 1'000'000;
  constexpr int kSpots = 20;
  std::uniform_real_distribution<double> spot_y(-1.2, 1.2), spot_sigma(0.05, 0.5);
  std::normal_distribution<double> noise(0.0, 1.0);
  double worst_z = 0.0;
  for (int k = 0; k < kSpots; ++k) {
    const Quantizer qz = Quantizer::uniform(-1.0, 1.0, 12);
    const double y = spot_y(rng), sigma = spot_sigma(rng);
    // The observed bin is itself a draw from the model, as in real data.
    const int z = qz.quantize(y + sigma * noise(rng));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < kDraws; ++i) hits += qz.quantize(y + sigma * noise(rng)) == z;
    const double p = std::exp(bin_log_likelihood(y, z, std::log(sigma), qz).value);
    const double se = std::sqrt(p * (1.0 - p) / double(kDraws));
    const double freq = double(hits) / double(kDraws);
    worst_z = std::max(worst_z, std::abs(freq - p) / se);
  }
  return {worst_sum <= kNormalizationTol && worst_z <= kMonteCarloSe,
          fmt("max |sum - 1| %.2e over 1000 cases (tol %.0e); worst Monte-Carlo deviation "
              "%.2f SE over %d spots (tol %.0f SE)",
              worst_sum, kNormalizationTol, worst_z, kSpots, kMonteCarloSe)};
}

// 5. Colored-noise Wiener-Hammerstein identification with the noise model.
Outcome wh_pem_recovery() {
  const auto ds = generate_wh_colored(1, 20000);
  std::mt19937_64 rng(7);
  DynoNetModel model = build_wh({}, rng);
  model.normalization() = Normalization::fit(ds.u, ds.y);
  model.normalization().enabled = true;
  PemModel pem(std::move(model));
  TrainConfig cfg;
  cfg.iterations = 40000;
  cfg.adam.learning_rate = 1e-4;
  const auto r = fit_pem(pem, ds.u, ds.y, cfg);

  const double fit = fit_index(ds.y_test, pem.deterministic().simulate_physical(ds.u_test));
  const auto H = pem.estimated_noise_filter();
  double worst_db = 0.0;
  for (int i = 0; i <= 290; ++i) {
    const double f = 0.01 + 0.001 * i;
    worst_db = std::max(worst_db,
                        std::abs(magnitude_db(H, f) - magnitude_db(ds.noise_filter, f)));
  }
  const auto& n = pem.deterministic().normalization();
  const Signal eps = pem.prediction_error(n.normalize_input(ds.u), n.normalize_output(ds.y));
  const auto acf = autocorrelation(eps, kWhAcfLags);
  double worst_r = 0.0;
  for (std::size_t k = 1; k <= kWhAcfLags; ++k) worst_r = std::max(worst_r, std::abs(acf[k]));
  const double bound = 3.0 / std::sqrt(double(ds.u.length()));
  return {fit >= kWhFitMin && worst_db <= kWhNoiseDbTol && worst_r <= bound,
          fmt("fit %.2f%% (min %.0f), noise model error %.2f dB (tol %.0f), max |r_k| %.4f "
              "(bound %.4f), %zu iterations in %.0f s",
              fit, kWhFitMin, worst_db, kWhNoiseDbTol, worst_r, bound, r.iterations_run,
              r.wall_time_s)};
}

// 6. Parallel Wiener-Hammerstein identification from quantized output.
Outcome pwh_quantized_recovery() {
  const auto ds = generate_pwh_quantized(1, 4096, default_rms_levels(), 4);
  std::mt19937_64 rng(7);
  DynoNetModel model = build_pwh({}, rng);
  // Only the input is standardized: the quantizer acts in physical units.
  auto norm = Normalization::fit(ds.u, ds.u);
  norm.y_mean = {0.0};
  norm.y_std = {1.0};
  norm.enabled = true;
  model.normalization() = norm;
  double log_sigma = std::log(0.5);
  TrainConfig cfg;
  cfg.iterations = 4000;
  cfg.adam.learning_rate = 1e-3;
  const auto r = fit_quantized(model, log_sigma, ds.u, ds.z, ds.quantizer, cfg);

  const double fit = fit_index(ds.y_test, model.simulate_physical(ds.u_test));
  const double sigma = std::exp(log_sigma);
  const double rel = std::abs(sigma - ds.sigma_e) / ds.sigma_e;
  return {fit >= kPwhFitMin && rel <= kPwhSigmaRelTol,
          fmt("held-out fit %.2f%% (min %.0f), sigma_e %.4f vs %.4f, rel err %.3f (tol %.2f), "
              "%zu iterations in %.0f s",
              fit, kPwhFitMin, sigma, ds.sigma_e, rel, kPwhSigmaRelTol, r.iterations_run,
              r.wall_time_s)};
}

// 7. Algebraic identities of the predictor, the noise inverse and the
// quantizer.
Outcome identities() {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> n(0.0, 1.0);

  // y_hat + eps = y up to the rounding of one subtraction and one addition.
  double worst_ulps = 0.0;
  for (int k = 0; k < 20; ++k) {
    PemModel pem(build_wh({2, 2, 1, 0, 4}, rng));
    const auto f = oracle::random_stable(rng, 2, 2, 1, 0.7);
    std::vector<double> b = f.b;
    for (double& v : b) v *= 0.3;
    pem.set_noise_check(TransferFunction(b, f.a, 1));
    const Signal u = to_signal(gaussian(rng, 200)), y = to_signal(gaussian(rng, 200));
    const Signal eps = pem.prediction_error(u, y);
    const Signal y_hat = pem.one_step_predictor(u, y);
    for (std::size_t t = 0; t < 200; ++t) {
      const double unit = std::numeric_limits<double>::epsilon() *
                          (std::abs(y(0, t, 0)) + std::abs(eps(0, t, 0)));
      worst_ulps = std::max(worst_ulps, std::abs(y_hat(0, t, 0) + eps(0, t, 0) - y(0, t, 0)) /
                                            std::max(unit, std::numeric_limits<double>::min()));
    }
  }

  // The inverse noise filter is monic: its impulse response starts at 1.
  int impulse_failures = 0;
  for (int k = 0; k < 200; ++k) {
    DynoNetModel m;
    m.add_gblock(MimoGBlock({1, 1, 0, 0, 0}, {TransferFunction({0.0}, {}, 0)}));
    PemModel pem(std::move(m), k % 5, (k / 5) % 5);
    auto h = pem.noise_check();
    std::vector<double> b = h.b(), a = h.a();
    for (double& v : b) v = 2.0 * n(rng);
    for (double& v : a) v = 0.2 * n(rng);
    pem.set_noise_check(TransferFunction(b, a, 1));
    impulse_failures += impulse_response(pem.inverse_noise_filter(), 4)[0] != 1.0;
  }

  // x = q_{m+1} belongs to bin m; the next double up belongs to bin m + 1.
  int boundary_failures = 0;
  for (int k = 0; k < 200; ++k) {
    const Quantizer qz = k % 2 ? random_quantizer(rng) : Quantizer::uniform(-1.0, 1.0, 12);
    const auto& q = qz.thresholds();
    for (int m = 0; m + 1 < static_cast<int>(qz.bins()); ++m) {
      const double edge = q[static_cast<std::size_t>(m) + 1];
      boundary_failures += qz.quantize(edge) != m;
      boundary_failures += qz.quantize(std::nextafter(edge, HUGE_VAL)) != m + 1;
    }
  }
  return {worst_ulps <= 2.0 && impulse_failures == 0 && boundary_failures == 0,
          fmt("|y_hat + eps - y| <= %.2f eps(|y| + |eps|) (tol 2, IEEE rounding); inverse "
              "noise impulse[0] != 1 in %d of 200; boundary rule violations %d",
              worst_ulps, impulse_failures, boundary_failures)};
}

// 8. Adam on an FIR model with squared error reaches the least-squares fit.
Outcome least_squares() {
  constexpr std::size_t kTaps = 20, kT = 2000;
  std::mt19937_64 rng(808);
  const Signal u = white_noise(rng, 1, kT, 1.0);
  std::vector<double> g(kT, 0.0);
  for (std::size_t j = 0; j < kTaps; ++j) g[j] = std::pow(0.8, double(j)) * std::cos(0.7 * double(j));
  Signal y = convolve_truncated(g, u);
  const Signal noise = white_noise(rng, 1, kT, 0.1);
  for (std::size_t i = 0; i < y.size(); ++i) y.flat()[i] += noise.flat()[i];

  DynoNetModel model;
  model.add_gblock({1, 1, kTaps - 1, 0, 0}, rng);
  TrainConfig cfg;
  cfg.iterations = 20000;
  cfg.adam.learning_rate = 1e-2;
  cfg.plateau_window = 500;
  cfg.plateau_tolerance = 1e-12;
  const auto r = fit_mse(model, u, y, cfg);

  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(kT, kTaps);
  Eigen::VectorXd target(kT);
  for (std::size_t t = 0; t < kT; ++t) {
    for (std::size_t j = 0; j < kTaps && j <= t; ++j) phi(Eigen::Index(t), Eigen::Index(j)) = u(0, t - j, 0);
    target(Eigen::Index(t)) = y(0, t, 0);
  }
  const Eigen::VectorXd ls = (phi.transpose() * phi).ldlt().solve(phi.transpose() * target);
  const auto b = model.gblock(0).cell(0, 0).b();
  const Eigen::VectorXd est = Eigen::Map<const Eigen::VectorXd>(b.data(), Eigen::Index(b.size()));
  const double rel = (est - ls).norm() / ls.norm();
  return {rel <= kLeastSquaresTol,
          fmt("%zu taps, relative parameter error %.2e (tol %.0e) after %zu iterations", kTaps,
              rel, kLeastSquaresTol, r.iterations_run)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "G-block gradients vs finite differences", gradient_suite},
      {2, "input adjoint vs explicit cross-correlation", flip_trick},
      {3, "recursive filter vs impulse-response convolution", convolution},
      {4, "quantized likelihood normalization", likelihood_normalization},
      {5, "WH colored-noise PEM recovery", wh_pem_recovery},
      {6, "PWH quantized-output recovery", pwh_quantized_recovery},
      {7, "algebraic identities", identities},
      {8, "FIR least squares", least_squares},
  };
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
