#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "dynonet/signal.hpp"
#include "dynonet/tape.hpp"
#include "dynonet/transfer_function.hpp"

namespace dynonet {

/// Shape of a MIMO G-block: an out x in grid of SISO filters sharing orders.
struct GBlockSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t n_b = 1;
  std::size_t n_a = 1;
  std::size_t n_k = 0;
  friend bool operator==(const GBlockSpec&, const GBlockSpec&) = default;
};

/// Value form of a MIMO G-block. Output channel o is sum_i G_{o,i}(q) u_i.
class MimoGBlock {
 public:
  /// `cells` is row-major over (out, in). Throws ShapeError when a cell's
  /// orders disagree with `spec`.
  MimoGBlock(GBlockSpec spec, std::vector<TransferFunction> cells);

  const GBlockSpec& spec() const noexcept { return spec_; }
  const TransferFunction& cell(std::size_t out, std::size_t in) const {
    return cells_.at(out * spec_.in_channels + in);
  }

 private:
  GBlockSpec spec_;
  std::vector<TransferFunction> cells_;
};

Signal mimo_forward(const MimoGBlock& block, const Signal& u);

/// Single-hidden-layer tanh network applied independently at every time
/// step: y = W2 tanh(W1 x + c1) + c2. Matrices are row-major.
struct MlpParams {
  std::size_t in = 1;
  std::size_t hidden = 10;
  std::size_t out = 1;
  std::vector<double> w1;  // hidden x in
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // out x hidden
  std::vector<double> b2;  // out

  /// Zero weights of the given widths.
  static MlpParams zeros(std::size_t in, std::size_t hidden, std::size_t out);
  /// Throws ShapeError if any vector has the wrong size.
  void validate() const;
};

Signal mlp_forward(const MlpParams& mlp, const Signal& x);

/// A bank of `groups` independent MLPs. Group g maps channels
/// [g*in/groups, (g+1)*in/groups) to its own slice of the output channels.
struct MlpSpec {
  std::size_t in_channels = 1;
  std::size_t hidden = 10;
  std::size_t out_channels = 1;
  std::size_t groups = 1;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Records a MIMO G-block on the tape. `cells` lists (b, a) parameter ids
/// for every grid cell, row-major over (out, in).
Var gblock_op(Tape& tape, Var x, ParameterStore& store, const GBlockSpec& spec,
              std::span<const ParamId> cells);

/// Records an MLP bank on the tape. `params` lists (w1, b1, w2, b2) for
/// every group.
Var mlp_op(Tape& tape, Var x, ParameterStore& store, const MlpSpec& spec,
           std::span<const ParamId> params);

/// Per-channel affine scaling applied outside the trainable model.
struct Normalization {
  bool enabled = false;
  std::vector<double> u_mean, u_std, y_mean, y_std;

  /// Zero-mean unit-variance statistics over every batch element and time
  /// step. Channels with zero spread keep a unit scale.
  static Normalization fit(const Signal& u, const Signal& y);

  Signal normalize_input(const Signal& u) const;
  Signal normalize_output(const Signal& y) const;
  Signal denormalize_output(const Signal& y) const;
};

/// Initialization of freshly built layers.
struct InitOptions {
  double b_std = 0.01;  // numerator coefficients ~ N(0, b_std^2), a = 0
};

/// Sequence of G-blocks and MLP banks whose coefficients live in an owned
/// ParameterStore.
class DynoNetModel {
 public:
  struct Layer {
    std::variant<GBlockSpec, MlpSpec> spec;
    std::vector<ParamId> params;
  };

  /// Appends a layer; its input width must match the current output width.
  void add_gblock(const GBlockSpec& spec, std::mt19937_64& rng,
                  const InitOptions& init = {});
  void add_mlp(const MlpSpec& spec, std::mt19937_64& rng);

  /// Appends a layer with explicit coefficients.
  void add_gblock(const MimoGBlock& block);
  void add_mlp_bank(const MlpSpec& spec, std::span<const MlpParams> groups);

  std::size_t input_channels() const;
  std::size_t output_channels() const;

  /// Records the model on a tape, reading and differentiating this model's
  /// parameters.
  Var forward(Tape& tape, Var u);

  /// Open-loop simulation without a tape (normalization not applied).
  Signal simulate(const Signal& u) const;

  /// Simulation in physical units: normalizes `u`, simulates, and maps the
  /// output back when normalization is enabled.
  Signal simulate_physical(const Signal& u) const;

  MimoGBlock gblock(std::size_t layer) const;
  std::vector<MlpParams> mlp_bank(std::size_t layer) const;

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  ParameterStore& parameters() noexcept { return store_; }
  const ParameterStore& parameters() const noexcept { return store_; }

  Normalization& normalization() noexcept { return norm_; }
  const Normalization& normalization() const noexcept { return norm_; }

 private:
  std::size_t check_width(std::size_t in) const;

  ParameterStore store_;
  std::vector<Layer> layers_;
  Normalization norm_;
};

/// Wiener-Hammerstein structure: G(n_a, n_b, n_k=1) -> MLP(1, hidden, 1) ->
/// G(n_a, n_b, n_k=0).
struct WhConfig {
  std::size_t n_b = 8;
  std::size_t n_a = 8;
  std::size_t n_k_first = 1;
  std::size_t n_k_second = 0;
  std::size_t hidden = 10;
};

/// Parallel Wiener-Hammerstein structure: 1->branches G-block, one MLP per
/// branch, branches->1 G-block.
struct PwhConfig {
  std::size_t n_b = 12;
  std::size_t n_a = 12;
  std::size_t n_k = 1;
  std::size_t branches = 2;
  std::size_t hidden = 10;
};

DynoNetModel build_wh(const WhConfig& config, std::mt19937_64& rng,
                      const InitOptions& init = {});
DynoNetModel build_pwh(const PwhConfig& config, std::mt19937_64& rng,
                       const InitOptions& init = {});

}  // namespace dynonet
