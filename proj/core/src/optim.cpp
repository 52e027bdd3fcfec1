#include "dynonet/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dynonet {

bool adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      ++state.skipped;
      return false;
    }
  }
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
  return true;
}

namespace {

std::size_t total_scalars(const std::vector<ParameterStore*>& stores) {
  std::size_t n = 0;
  for (const auto* s : stores) n += s->scalar_count();
  return n;
}

std::vector<double> gather_values(const std::vector<ParameterStore*>& stores) {
  std::vector<double> out;
  for (const auto* s : stores) {
    auto v = s->flat_values();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void scatter_values(const std::vector<ParameterStore*>& stores,
                    std::span<const double> values) {
  std::size_t offset = 0;
  for (auto* s : stores) {
    const std::size_t n = s->scalar_count();
    s->assign_flat_values(values.subspan(offset, n));
    offset += n;
  }
}

}  // namespace

Adam::Adam(std::vector<ParameterStore*> stores, AdamConfig config)
    : stores_(std::move(stores)), state_(config, total_scalars(stores_)) {}

bool Adam::step() {
  values_.clear();
  grads_.clear();
  for (const auto* s : stores_) {
    for (const auto& p : *s) {
      values_.insert(values_.end(), p.value.begin(), p.value.end());
      grads_.insert(grads_.end(), p.grad.begin(), p.grad.end());
    }
  }
  if (!adam_step(state_, values_, grads_)) return false;
  scatter_values(stores_, values_);
  return true;
}

void Adam::reset_moments() {
  std::fill(state_.m.begin(), state_.m.end(), 0.0);
  std::fill(state_.v.begin(), state_.v.end(), 0.0);
  state_.step = 0;
}

TrainResult train(const Objective& objective, std::vector<ParameterStore*> stores,
                  std::size_t sequences, const TrainConfig& config) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(clock::now() - start).count();
  };

  Adam adam(stores, config.adam);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> all(sequences);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const bool minibatch = config.batch_size > 0 && config.batch_size < sequences;

  TrainResult result;
  result.best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best = gather_values(stores);
  std::vector<double> last_finite = best;
  std::vector<std::size_t> batch;

  // Loss and gradients at the current parameters; false on divergence.
  auto evaluate = [&](std::span<const std::size_t> seqs, bool with_grad,
                      double& loss) -> bool {
    for (auto* s : stores) s->zero_grad();
    try {
      Tape tape;
      Var l = objective(tape, seqs);
      loss = tape.value(l).item();
      if (!std::isfinite(loss)) return false;
      if (with_grad) tape.backward(l);
      return true;
    } catch (const DivergenceError&) {
      return false;
    }
  };

  auto recover = [&](std::size_t iteration) {
    if (result.recoveries >= config.max_recoveries) {
      scatter_values(stores, best);
      throw TrainingDivergedError(
          "training diverged at iteration " + std::to_string(iteration) + " after " +
          std::to_string(result.recoveries) + " recoveries (learning rate " +
          std::to_string(adam.learning_rate()) + ")");
    }
    ++result.recoveries;
    scatter_values(stores, last_finite);
    adam.set_learning_rate(0.5 * adam.learning_rate());
    adam.reset_moments();
  };

  std::size_t it = 0;
  while (it < config.iterations) {
    if (minibatch) {
      batch = all;
      std::shuffle(batch.begin(), batch.end(), rng);
      batch.resize(config.batch_size);
      std::sort(batch.begin(), batch.end());
    } else {
      batch = all;
    }
    double loss = 0.0;
    if (!evaluate(batch, true, loss)) {
      recover(it);
      continue;
    }
    last_finite = gather_values(stores);
    if (loss < result.best_loss) {
      result.best_loss = loss;
      best = last_finite;
    }
    result.trace.push_back({it, loss, result.best_loss, elapsed()});
    if (config.on_iteration) config.on_iteration(it, loss);
    if (!adam.step()) ++result.skipped_steps;
    ++it;

    if (config.plateau_window > 0 && result.trace.size() > config.plateau_window) {
      const double before =
          result.trace[result.trace.size() - 1 - config.plateau_window].best_loss;
      const double now = result.best_loss;
      if (before - now <= config.plateau_tolerance * std::abs(before)) {
        result.plateau_reached = true;
        break;
      }
    }
  }

  if (config.iterations > 0) {
    double final_loss = 0.0;
    if (evaluate(all, false, final_loss) && final_loss < result.best_loss) {
      result.best_loss = final_loss;
      best = gather_values(stores);
    }
    scatter_values(stores, best);
  } else {
    double init_loss = 0.0;
    if (evaluate(all, false, init_loss)) result.best_loss = init_loss;
  }
  for (auto* s : stores) s->zero_grad();
  result.iterations_run = it;
  result.final_learning_rate = adam.learning_rate();
  result.wall_time_s = elapsed();
  return result;
}

}  // namespace dynonet
