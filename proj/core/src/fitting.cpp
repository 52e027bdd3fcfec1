#include "dynonet/fitting.hpp"

#include <stdexcept>

namespace dynonet {

Signal select_batch(const Signal& x, std::span<const std::size_t> index) {
  Signal out(index.size(), x.length(), x.channels());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= x.batch()) throw ShapeError("select_batch: index out of range");
    for (std::size_t c = 0; c < x.channels(); ++c) {
      auto src = x.series(index[k], c);
      std::copy(src.begin(), src.end(), out.series(k, c).begin());
    }
  }
  return out;
}

BinSignal select_batch(const BinSignal& z, std::span<const std::size_t> index) {
  BinSignal out{index.size(), z.length, std::vector<int>(index.size() * z.length)};
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= z.batch) throw ShapeError("select_batch: index out of range");
    std::copy_n(z.data.begin() + static_cast<std::ptrdiff_t>(index[k] * z.length), z.length,
                out.data.begin() + static_cast<std::ptrdiff_t>(k * z.length));
  }
  return out;
}

namespace {

// Scaled training data plus a cache of the full-batch signals, so the
// common full-batch case does not copy every iteration.
struct TrainingData {
  Signal u, y;
  std::size_t batch = 0;

  Signal u_for(std::span<const std::size_t> seqs) const {
    return seqs.size() == batch ? u : select_batch(u, seqs);
  }
  Signal y_for(std::span<const std::size_t> seqs) const {
    return seqs.size() == batch ? y : select_batch(y, seqs);
  }
};

TrainingData scaled(const DynoNetModel& model, const Signal& u, const Signal& y) {
  require_same_shape(u, Signal(u.batch(), u.length(), model.input_channels()), "fit: input");
  if (y.batch() != u.batch() || y.length() != u.length() ||
      y.channels() != model.output_channels()) {
    throw ShapeError("fit: output " + y.shape_string() + " does not match input " +
                     u.shape_string());
  }
  const auto& n = model.normalization();
  if (!n.enabled) return {u, y, u.batch()};
  return {n.normalize_input(u), n.normalize_output(y), u.batch()};
}

}  // namespace

TrainResult fit_mse(DynoNetModel& model, const Signal& u, const Signal& y,
                    const TrainConfig& config) {
  const TrainingData data = scaled(model, u, y);
  Objective objective = [&](Tape& tape, std::span<const std::size_t> seqs) {
    Var in = tape.constant(data.u_for(seqs));
    Var target = tape.constant(data.y_for(seqs));
    return tape.mean(tape.square(tape.sub(model.forward(tape, in), target)));
  };
  return train(objective, {&model.parameters()}, u.batch(), config);
}

TrainResult fit_pem(PemModel& model, const Signal& u, const Signal& y,
                    const TrainConfig& config) {
  const TrainingData data = scaled(model.deterministic(), u, y);
  Objective objective = [&](Tape& tape, std::span<const std::size_t> seqs) {
    Var in = tape.constant(data.u_for(seqs));
    Var target = tape.constant(data.y_for(seqs));
    return model.pem_loss(tape, in, target);
  };
  return train(objective, {&model.deterministic().parameters(), &model.noise_parameters()},
               u.batch(), config);
}

TrainResult fit_quantized(DynoNetModel& model, double& log_sigma_e, const Signal& u,
                          const BinSignal& z, const Quantizer& qz,
                          const TrainConfig& config) {
  if (model.output_channels() != 1) {
    throw ShapeError("fit_quantized: model must have a single output");
  }
  if (z.batch != u.batch() || z.length != u.length()) {
    throw ShapeError("fit_quantized: bins do not match the input shape");
  }
  const auto& n = model.normalization();
  const Signal un = n.enabled ? n.normalize_input(u) : u;
  ParameterStore scale;
  const ParamId log_sigma = scale.add("log_sigma_e", {log_sigma_e});
  Objective objective = [&](Tape& tape, std::span<const std::size_t> seqs) {
    const bool full = seqs.size() == u.batch();
    Var in = tape.constant(full ? un : select_batch(un, seqs));
    Var y_sim = model.forward(tape, in);
    return full ? quantized_nll_loss(tape, y_sim, z, scale, log_sigma, qz)
                : quantized_nll_loss(tape, y_sim, select_batch(z, seqs), scale,
                                     log_sigma, qz);
  };
  TrainResult result = train(objective, {&model.parameters(), &scale}, u.batch(), config);
  log_sigma_e = scale[log_sigma].value.front();
  return result;
}

}  // namespace dynonet
