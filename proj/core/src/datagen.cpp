#include "dynonet/datagen.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace dynonet {

TransferFunction wh_noise_filter() {
  return {{1.0, -1.568, 0.902}, {-1.901, 0.9409}, 0};
}

double h2_norm(const TransferFunction& g, std::size_t length) {
  double acc = 0.0;
  for (double v : impulse_response(g, length)) acc += v * v;
  return std::sqrt(acc);
}

Signal white_noise(std::mt19937_64& rng, std::size_t batch, std::size_t length,
                   double std_dev) {
  Signal out(batch, length, 1);
  if (std_dev == 0.0) return out;
  std::normal_distribution<double> dist(0.0, std_dev);
  for (double& v : out.flat()) v = dist(rng);
  return out;
}

Signal multisine(std::mt19937_64& rng, std::size_t length, const MultisineSpec& spec) {
  if (length == 0) return Signal(1, 0, 1);
  std::size_t lines = static_cast<std::size_t>(std::floor(spec.max_frequency *
                                                          static_cast<double>(length)));
  if (spec.tones > 0) lines = std::min(lines, spec.tones);
  lines = std::max<std::size_t>(lines, 1);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<double> phases(lines);
  for (double& p : phases) p = phase(rng);

  Signal out(1, length, 1);
  auto x = out.series(0, 0);
  const double w0 = 2.0 * std::numbers::pi / static_cast<double>(length);
  for (std::size_t t = 0; t < length; ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < lines; ++k) {
      acc += std::cos(w0 * static_cast<double>((k + 1) * t % length) + phases[k]);
    }
    x[t] = acc;
  }
  double power = 0.0;
  for (double v : x) power += v * v;
  const double current = std::sqrt(power / static_cast<double>(length));
  const double scale = current > 0.0 ? spec.rms / current : 0.0;
  for (double& v : x) v *= scale;
  return out;
}

namespace {

std::vector<std::complex<double>> random_roots(std::mt19937_64& rng, std::size_t count,
                                               double max_modulus) {
  std::uniform_real_distribution<double> modulus(0.5, max_modulus);
  std::uniform_real_distribution<double> angle(0.1, 0.9 * std::numbers::pi);
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  std::vector<std::complex<double>> roots;
  while (roots.size() + 1 < count) {
    const auto r = std::polar(modulus(rng), angle(rng));
    roots.push_back(r);
    roots.push_back(std::conj(r));
  }
  if (roots.size() < count) {
    roots.emplace_back(sign(rng) < 0.0 ? -modulus(rng) : modulus(rng), 0.0);
  }
  return roots;
}

// tanh unit realized as a one-neuron MLP: gain * tanh(slope * x + offset) + bias,
// with bias chosen so that f(0) = 0 exactly under the model's own evaluation.
MlpParams saturation(double gain, double slope, double offset) {
  MlpParams p{1, 1, 1, {slope}, {offset}, {gain}, {0.0}};
  p.b2[0] = -mlp_forward(p, Signal(1, 1, 1)).item();
  return p;
}

}  // namespace

TransferFunction random_stable_filter(std::mt19937_64& rng, std::size_t n_b,
                                      std::size_t n_a, std::size_t n_k,
                                      double max_modulus) {
  if (!(max_modulus > 0.5 && max_modulus < 1.0)) {
    throw std::invalid_argument("random_stable_filter: max_modulus must be in (0.5, 1)");
  }
  const auto pole_roots = random_roots(rng, n_a, max_modulus);
  const auto zero_roots = random_roots(rng, n_b, max_modulus);
  std::vector<double> a = monic_from_roots(pole_roots);
  std::vector<double> b{1.0};
  const auto tail = monic_from_roots(zero_roots);
  b.insert(b.end(), tail.begin(), tail.end());
  TransferFunction unscaled(b, a, n_k);
  const double norm = h2_norm(unscaled, 4096);
  for (double& v : b) v /= norm;
  return {b, a, n_k};
}

std::vector<double> default_rms_levels() { return {0.1, 0.325, 0.55, 0.775, 1.0}; }

WhColoredDataset generate_wh_colored(std::uint64_t seed, std::size_t length,
                                     const WhColoredConfig& config) {
  if (length == 0) throw std::invalid_argument("generate_wh_colored: length must be >= 1");
  std::mt19937_64 rng(seed);
  WhColoredDataset ds;
  ds.seed = seed;
  ds.noise_std = config.noise_std;

  const std::size_t n = config.truth_order;
  const auto g1 = random_stable_filter(rng, n, n, 1);
  const auto g2 = random_stable_filter(rng, n, n, 0);
  ds.truth.add_gblock(MimoGBlock({1, 1, n, n, 1}, {g1}));
  const MlpParams f = saturation(1.0, 1.0, 0.25);
  ds.truth.add_mlp_bank({1, 1, 1, 1}, std::span<const MlpParams>(&f, 1));
  ds.truth.add_gblock(MimoGBlock({1, 1, n, n, 0}, {g2}));

  ds.u = white_noise(rng, 1, length, config.input_std);
  ds.y_clean = ds.truth.simulate(ds.u);
  ds.white_std = config.noise_std / h2_norm(ds.noise_filter);
  const Signal e = white_noise(rng, 1, length, ds.white_std);
  const Signal v = filter_forward(ds.noise_filter, e);
  ds.y = ds.y_clean;
  auto y = ds.y.flat();
  auto vv = v.flat();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += vv[i];

  const std::size_t test_length = config.test_length > 0 ? config.test_length : length;
  ds.u_test = white_noise(rng, 1, test_length, config.input_std);
  ds.y_test = ds.truth.simulate(ds.u_test);
  return ds;
}

PwhQuantizedDataset generate_pwh_quantized(std::uint64_t seed, std::size_t length,
                                           std::span<const double> rms_levels,
                                           std::size_t realizations,
                                           const PwhQuantizedConfig& config) {
  if (length == 0) throw std::invalid_argument("generate_pwh_quantized: length must be >= 1");
  for (double r : rms_levels) {
    if (!(r > 0.0)) throw std::invalid_argument("generate_pwh_quantized: rms levels must be positive");
  }
  std::mt19937_64 rng(seed);
  PwhQuantizedDataset ds;
  ds.quantizer = config.quantizer;
  ds.seed = seed;
  ds.sigma_e = config.sigma_e;

  const std::size_t n = config.truth_order;
  std::vector<TransferFunction> in_cells{random_stable_filter(rng, n, n, 1),
                                         random_stable_filter(rng, n, n, 1)};
  std::vector<TransferFunction> out_cells;
  for (int i = 0; i < 2; ++i) {
    auto g = random_stable_filter(rng, n, n, 1);
    std::vector<double> b = g.b();
    for (double& v : b) v *= 0.6;
    out_cells.emplace_back(b, g.a(), 1);
  }
  ds.truth.add_gblock(MimoGBlock({1, 2, n, n, 1}, in_cells));
  const std::vector<MlpParams> branches{saturation(1.0, 1.0, 0.2),
                                        saturation(0.8, 1.25, -0.1)};
  ds.truth.add_mlp_bank({2, 1, 2, 2}, branches);
  ds.truth.add_gblock(MimoGBlock({2, 1, n, n, 1}, out_cells));

  const MultisineSpec base{1.0, config.max_frequency, config.tones};
  auto excite = [&](std::size_t per_level, std::vector<double>& levels) {
    std::vector<Signal> parts;
    for (double r : rms_levels) {
      for (std::size_t k = 0; k < per_level; ++k) {
        MultisineSpec spec = base;
        spec.rms = r;
        parts.push_back(multisine(rng, length, spec));
        levels.push_back(r);
      }
    }
    return concat_batch(parts);
  };

  ds.u = excite(realizations, ds.rms);
  ds.y_latent = ds.truth.simulate(ds.u);
  Signal noisy = ds.y_latent;
  const Signal e = white_noise(rng, noisy.batch(), length, config.sigma_e);
  auto y = noisy.flat();
  auto ev = e.flat();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += ev[i];
  ds.z = quantize(noisy, ds.quantizer);

  ds.u_test = excite(config.test_realizations, ds.test_rms);
  ds.y_test = ds.truth.simulate(ds.u_test);
  return ds;
}

}  // namespace dynonet
