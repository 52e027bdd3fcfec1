#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "commands.hpp"
#include "dynonet/blocks.hpp"
#include "dynonet/datagen.hpp"
#include "dynonet/pem.hpp"
#include "dynonet/quantized.hpp"
#include "dynonet/tf_grad.hpp"

namespace dynonet::cli {

namespace {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  double tolerance = 1e-5;
  std::size_t filters = 50;
  bool corrupt = false;
};

struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  double max_error = 0.0;
};

// Fourth-order central difference of f along one coordinate.
double derivative(const std::function<double()>& f, double& x, double rel_step) {
  const double x0 = x;
  const double h = rel_step * std::max(1.0, std::abs(x0));
  auto at = [&](double offset) {
    x = x0 + offset;
    return f();
  };
  const double d = 8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h));
  x = x0;
  return d / (12.0 * h);
}

// Elementwise relative error with a floor tied to the largest reference
// entry, so exact zeros do not divide by zero.
double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& fd) {
  double scale = 0.0;
  for (double v : fd) scale = std::max(scale, std::abs(v));
  const double floor = 1e-8 * std::max(1.0, scale);
  double worst = 0.0;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double den = std::max({std::abs(analytic[i]), std::abs(fd[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - fd[i]) / den);
  }
  return worst;
}

Signal gaussian(std::mt19937_64& rng, std::size_t T) {
  return white_noise(rng, 1, T, 1.0);
}

double weighted_sum(const Signal& y, const Signal& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += y.flat()[i] * w.flat()[i];
  return acc;
}

// Loss <w, G(u)> of random stable SISO blocks against its b, a and u
// gradients.
SuiteResult gblock_suite(std::mt19937_64& rng, std::size_t count, double corrupt) {
  SuiteResult r{"gblock", 0, 0.0};
  std::uniform_int_distribution<std::size_t> order(0, 8), delay(0, 2);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t T = 64;
    const TransferFunction g0 = random_stable_filter(rng, order(rng), order(rng), delay(rng), 0.9);
    std::vector<double> b = g0.b(), a = g0.a();
    Signal u = gaussian(rng, T);
    const Signal w = gaussian(rng, T);
    const TransferFunction g(b, a, g0.n_k());
    const auto grads = gblock_backward(g.view(), u, filter_forward(g, u), w);
    std::vector<double> analytic, fd;
    auto loss = [&] { return weighted_sum(filter_forward(TransferFunction(b, a, g0.n_k()), u), w); };
    for (std::size_t j = 0; j < b.size(); ++j) {
      analytic.push_back(grads.b_bar[j] * corrupt);
      fd.push_back(derivative(loss, b[j], 1e-6));
    }
    for (std::size_t j = 0; j < a.size(); ++j) {
      analytic.push_back(grads.a_bar[j] * corrupt);
      fd.push_back(derivative(loss, a[j], 1e-6));
    }
    for (std::size_t t = 0; t < T; ++t) {
      analytic.push_back(grads.u_bar.flat()[t] * corrupt);
      fd.push_back(derivative(loss, u.flat()[t], 1e-6));
    }
    r.checks += fd.size();
    r.max_error = std::max(r.max_error, max_relative_error(analytic, fd));
  }
  return r;
}

// Every parameter of the given stores against finite differences of `loss`,
// after `record` has run backward on a fresh tape.
SuiteResult store_suite(std::string name, std::vector<ParameterStore*> stores,
                        const std::function<void(Tape&)>& record,
                        const std::function<double()>& loss, double corrupt) {
  for (auto* s : stores) s->zero_grad();
  Tape tape;
  record(tape);
  std::vector<double> analytic, fd;
  for (auto* s : stores) {
    for (auto& p : *s) {
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        analytic.push_back(p.grad[i] * corrupt);
        fd.push_back(derivative(loss, p.value[i], 3e-4));
      }
    }
  }
  return {std::move(name), fd.size(), max_relative_error(analytic, fd)};
}

SuiteResult model_suite(std::string name, DynoNetModel m, std::mt19937_64& rng, double corrupt) {
  const std::size_t T = 64;
  const Signal u = gaussian(rng, T), target = gaussian(rng, T);
  return store_suite(
      std::move(name), {&m.parameters()},
      [&](Tape& tape) {
        tape.backward(tape.mean(
            tape.square(tape.sub(m.forward(tape, tape.input(u)), tape.constant(target)))));
      },
      [&] {
        const Signal y = m.simulate(u);
        double acc = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
          acc += (y.flat()[i] - target.flat()[i]) * (y.flat()[i] - target.flat()[i]);
        }
        return acc / static_cast<double>(T);
      },
      corrupt);
}

SuiteResult pem_suite(std::mt19937_64& rng, double corrupt) {
  PemModel pem(build_wh({3, 3, 1, 0, 5}, rng), 2, 2);
  pem.set_noise_check(random_stable_filter(rng, 2, 2, 1, 0.8));
  const std::size_t T = 64;
  const Signal u = gaussian(rng, T), y = gaussian(rng, T);
  return store_suite(
      "pem", {&pem.deterministic().parameters(), &pem.noise_parameters()},
      [&](Tape& tape) { tape.backward(pem.pem_loss(tape, tape.input(u), tape.constant(y))); },
      [&] { return pem.pem_loss(u, y); }, corrupt);
}

SuiteResult quantized_suite(std::mt19937_64& rng, double corrupt) {
  const Quantizer qz = Quantizer::uniform(-1.0, 1.0, 12);
  const std::size_t T = 64;
  Signal y = white_noise(rng, 1, T, 0.6);
  const BinSignal z = quantize(white_noise(rng, 1, T, 0.6), qz);
  ParameterStore store;
  const ParamId ls = store.add("log_sigma_e", {std::log(0.3)});
  Tape tape;
  Var ys = tape.input(y);
  tape.backward(quantized_nll_loss(tape, ys, z, store, ls, qz));
  std::vector<double> analytic, fd;
  auto loss = [&] {
    return -quantized_loglik(y, z, {store[ls].value[0]}, qz).value / static_cast<double>(T);
  };
  const Signal y_bar = tape.adjoint(ys);
  for (std::size_t t = 0; t < T; ++t) {
    analytic.push_back(y_bar.flat()[t] * corrupt);
    fd.push_back(derivative(loss, y.flat()[t], 1e-5));
  }
  analytic.push_back(store[ls].grad[0] * corrupt);
  fd.push_back(derivative(loss, store[ls].value[0], 1e-5));
  return {"quantized", fd.size(), max_relative_error(analytic, fd)};
}

void gradcheck_command(const GradcheckOptions& o) {
  std::mt19937_64 rng(o.seed);
  const double corrupt = o.corrupt ? 1.001 : 1.0;
  std::vector<SuiteResult> results;
  results.push_back(gblock_suite(rng, o.filters, corrupt));
  results.push_back(model_suite("wh-model", build_wh({}, rng), rng, corrupt));
  results.push_back(model_suite("pwh-model", build_pwh({}, rng), rng, corrupt));
  results.push_back(pem_suite(rng, corrupt));
  results.push_back(quantized_suite(rng, corrupt));

  bool ok = true;
  std::printf("%-12s %8s %14s  %s\n", "suite", "checks", "max_rel_error", "status");
  for (const auto& r : results) {
    const bool pass = r.max_error <= o.tolerance;
    ok = ok && pass;
    std::printf("%-12s %8zu %14.3e  %s\n", r.name.c_str(), r.checks, r.max_error,
                pass ? "PASS" : "FAIL");
  }
  std::fflush(stdout);
  if (!ok) throw CheckFailed("gradient mismatch above tolerance " + std::to_string(o.tolerance));
}

}  // namespace

Action register_gradcheck(CLI::App& app) {
  auto o = std::make_shared<GradcheckOptions>();
  auto* sub = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  sub->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  sub->add_option("--tolerance", o->tolerance, "Largest accepted relative error")
      ->capture_default_str();
  sub->add_option("--filters", o->filters, "Random G-blocks in the gblock suite")
      ->capture_default_str();
  // Negative control for the test suite: scales every analytic gradient.
  sub->add_flag("--corrupt-gradient", o->corrupt)->group("");
  return [o] { gradcheck_command(*o); };
}

}  // namespace dynonet::cli
