#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynonet/tape.hpp"

namespace dynonet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moments and step counter of one Adam run over a flat parameter vector.
struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
  std::size_t skipped = 0;  // steps refused because of a non-finite gradient

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t size)
      : config(cfg), m(size, 0.0), v(size, 0.0) {}
};

/// Bias-corrected Adam update of `params` in place. Returns false, leaves
/// everything but the skip counter untouched, when any gradient is not
/// finite.
bool adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads);

/// Adam over every parameter of one or more stores.
class Adam {
 public:
  Adam(std::vector<ParameterStore*> stores, AdamConfig config);

  /// Applies one update from the gradients currently held by the stores.
  bool step();
  void reset_moments();

  double learning_rate() const noexcept { return state_.config.learning_rate; }
  void set_learning_rate(double lr) noexcept { state_.config.learning_rate = lr; }
  const AdamState& state() const noexcept { return state_; }

 private:
  std::vector<ParameterStore*> stores_;
  AdamState state_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

/// Raised when training keeps diverging after every allowed recovery.
class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  std::size_t iterations = 1000;
  AdamConfig adam;
  /// Divergence recoveries (restore last finite snapshot, halve the learning
  /// rate) before giving up.
  std::size_t max_recoveries = 5;
  /// Sequences per iteration; 0 uses every sequence (full batch).
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  /// Stop early when the best loss improved by less than
  /// `plateau_tolerance` (relative) over the last `plateau_window`
  /// iterations. 0 disables the check.
  std::size_t plateau_window = 0;
  double plateau_tolerance = 1e-6;
  /// Called after every iteration with (iteration, loss).
  std::function<void(std::size_t, double)> on_iteration;
};

struct TracePoint {
  std::size_t iteration = 0;
  double loss = 0.0;
  double best_loss = 0.0;
  double wall_time_s = 0.0;
};

struct TrainResult {
  std::vector<TracePoint> trace;
  double best_loss = 0.0;
  double final_learning_rate = 0.0;
  std::size_t iterations_run = 0;
  std::size_t recoveries = 0;
  std::size_t skipped_steps = 0;
  bool plateau_reached = false;
  double wall_time_s = 0.0;
};

/// Builds the scalar loss on a fresh tape for the given sequence indices.
using Objective =
    std::function<Var(Tape& tape, std::span<const std::size_t> sequences)>;

/// Full-batch (by default) Adam training. Each iteration records the loss
/// at the current parameters and then steps. On return the stores hold the
/// best parameters seen, including the final iterate.
///
/// A DivergenceError raised by the objective, or a non-finite loss, restores
/// the last parameters that produced a finite loss and halves the learning
/// rate; after `max_recoveries` such events TrainingDivergedError is thrown.
TrainResult train(const Objective& objective, std::vector<ParameterStore*> stores,
                  std::size_t sequences, const TrainConfig& config);

}  // namespace dynonet
