#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "dynonet/fitting.hpp"
#include "dynonet/metrics.hpp"
#include "dynonet/model_io.hpp"

namespace dynonet::cli {

namespace {

struct TrainOptions {
  std::string data;
  std::string test;
  std::string out = "run";
  std::string loss = "pem";
  std::string model = "wh";
  std::size_t n_b = 0, n_a = 0, hidden = 10, branches = 2;
  std::size_t noise_n_b = 2, noise_n_a = 2;
  double learning_rate = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  bool normalize = true;
  std::size_t batch_size = 0;
  std::size_t plateau_window = 0;
  double plateau_tolerance = 1e-6;
  std::size_t holdout = 0;
  double sigma0 = 0.5;
  std::size_t bins = 12;
  double q_min = -1.0, q_max = 1.0;
  std::size_t log_every = 0;
};

DynoNetModel build_model(const TrainOptions& o, std::mt19937_64& rng) {
  if (o.model == "wh") {
    WhConfig c;
    if (o.n_b) c.n_b = o.n_b;
    if (o.n_a) c.n_a = o.n_a;
    c.hidden = o.hidden;
    return build_wh(c, rng);
  }
  PwhConfig c;
  if (o.n_b) c.n_b = o.n_b;
  if (o.n_a) c.n_a = o.n_a;
  c.hidden = o.hidden;
  c.branches = o.branches;
  return build_pwh(c, rng);
}

// Last `count` sequences of every signal go to the held-out split.
template <typename S>
std::pair<S, S> split_tail(const S& x, std::size_t count, std::size_t batch) {
  std::vector<std::size_t> head(batch - count), tail(count);
  std::iota(head.begin(), head.end(), std::size_t{0});
  std::iota(tail.begin(), tail.end(), batch - count);
  return {select_batch(x, head), select_batch(x, tail)};
}

nlohmann::json metrics_json(const DynoNetModel& m, const Signal& u, const Signal& y,
                            const std::string& on) {
  const Signal y_sim = m.simulate_physical(u);
  return {{"on", on}, {"fit", fit_index(y, y_sim)}, {"rmse", rmse(y, y_sim)}};
}

void train_command(const TrainOptions& o) {
  const Dataset data = read_dataset_csv(o.data);
  const bool quantized = o.loss == "quantized";
  if (quantized && !data.z) throw UsageError("--loss quantized needs a t,u,z dataset");
  if (!quantized && !data.y) throw UsageError("--loss " + o.loss + " needs a t,u,y dataset");

  Signal u = data.u;
  Signal y = data.y ? *data.y : Signal();
  BinSignal z = data.z ? *data.z : BinSignal{};
  std::optional<std::pair<Signal, Signal>> evaluation;  // (u, y) to score
  std::string evaluated_on = "train";
  if (!o.test.empty()) {
    const Dataset test = read_dataset_csv(o.test);
    if (!test.y) throw UsageError("--test must hold a t,u,y dataset");
    evaluation.emplace(test.u, *test.y);
    evaluated_on = "test";
  } else if (o.holdout > 0) {
    if (o.holdout >= u.batch()) throw UsageError("--holdout must leave a training sequence");
    const std::size_t batch = u.batch();
    auto [u_fit, u_out] = split_tail(u, o.holdout, batch);
    u = u_fit;
    if (quantized) {
      throw UsageError("--holdout needs latent outputs; pass --test for quantized data");
    }
    auto [y_fit, y_out] = split_tail(y, o.holdout, batch);
    y = y_fit;
    evaluation.emplace(u_out, y_out);
    evaluated_on = "holdout";
  } else if (!quantized) {
    evaluation.emplace(u, y);
  } else {
    evaluated_on = "none";
  }

  std::mt19937_64 rng(o.seed);
  DynoNetModel model = build_model(o, rng);
  if (model.input_channels() != 1 || model.output_channels() != 1) {
    throw UsageError("CSV data is single-input single-output");
  }
  if (o.normalize) {
    Normalization n = Normalization::fit(u, quantized ? u : y);
    if (quantized) n.y_mean = {0.0}, n.y_std = {1.0};
    n.enabled = true;
    model.normalization() = n;
  }

  TrainConfig cfg;
  cfg.iterations = o.iterations;
  cfg.adam.learning_rate = o.learning_rate;
  cfg.batch_size = o.batch_size;
  cfg.seed = o.seed;
  cfg.plateau_window = o.plateau_window;
  cfg.plateau_tolerance = o.plateau_tolerance;
  if (o.log_every > 0) {
    cfg.on_iteration = [&o](std::size_t it, double loss) {
      if (it % o.log_every == 0) std::cerr << "iteration " << it << " loss " << loss << "\n";
    };
  }

  nlohmann::json report{{"schema_version", 1},
                        {"command", "train"},
                        {"data", o.data},
                        {"loss", o.loss},
                        {"model", o.model},
                        {"seed", o.seed},
                        {"normalize", o.normalize},
                        {"learning_rate", o.learning_rate},
                        {"iterations_requested", o.iterations}};
  ModelFile file;
  TrainResult result;
  if (o.loss == "pem") {
    PemModel pem(std::move(model), o.noise_n_b, o.noise_n_a);
    result = fit_pem(pem, u, y, cfg);
    file.model = pem.deterministic();
    file.noise_check = pem.noise_check();
    const bool min_phase = pem.inverse_noise_filter_minimum_phase();
    const auto h = pem.estimated_noise_filter();
    report["noise_model"] = {{"h_check", {{"b", file.noise_check->b()},
                                          {"a", file.noise_check->a()},
                                          {"n_k", file.noise_check->n_k()}}},
                             {"h", {{"b", h.b()}, {"a", h.a()}, {"n_k", h.n_k()}}},
                             {"minimum_phase", min_phase}};
    if (!min_phase) {
      std::cerr << "warning: the fitted inverse noise filter is not minimum phase; the "
                   "estimated noise model H is unstable\n";
    }
  } else if (quantized) {
    const Quantizer qz = Quantizer::uniform(o.q_min, o.q_max, o.bins);
    double log_sigma = std::log(o.sigma0);
    result = fit_quantized(model, log_sigma, u, z, qz, cfg);
    file.model = std::move(model);
    file.quantizer = qz;
    file.log_sigma_e = log_sigma;
    report["sigma_e"] = std::exp(log_sigma);
  } else {
    result = fit_mse(model, u, y, cfg);
    file.model = std::move(model);
  }

  report["iterations_run"] = result.iterations_run;
  report["best_loss"] = result.best_loss;
  report["final_learning_rate"] = result.final_learning_rate;
  report["recoveries"] = result.recoveries;
  report["skipped_steps"] = result.skipped_steps;
  report["plateau_reached"] = result.plateau_reached;
  report["wall_time_s"] = result.wall_time_s;
  if (evaluation) {
    report["evaluation"] = metrics_json(file.model, evaluation->first, evaluation->second,
                                        evaluated_on);
  } else {
    report["evaluation"] = {{"on", "none"}};
  }

  const std::filesystem::path dir(o.out);
  save_model(dir / "model.json", file);
  std::ostringstream trace;
  trace.precision(17);
  trace << "iteration,loss,wall_time_s\n";
  for (const auto& p : result.trace) {
    trace << p.iteration << "," << p.loss << "," << p.wall_time_s << "\n";
  }
  write_text_file(dir / "loss_trace.csv", trace.str());
  write_text_file(dir / "report.json", report.dump(2) + "\n");

  std::cout << "iterations " << result.iterations_run << ", best loss " << result.best_loss
            << ", wall time " << result.wall_time_s << " s\n";
  if (evaluation) {
    std::cout << "fit " << report["evaluation"]["fit"].get<double>() << " %, rmse "
              << report["evaluation"]["rmse"].get<double>() << " (" << evaluated_on << ")\n";
  }
  if (quantized) std::cout << "sigma_e " << report["sigma_e"].get<double>() << "\n";
  std::cout << "wrote " << (dir / "model.json").string() << ", loss_trace.csv, report.json\n";
}

}  // namespace

Action register_train(CLI::App& app) {
  auto o = std::make_shared<TrainOptions>();
  auto* sub = app.add_subcommand("train", "Train a dynoNet model on a CSV dataset");
  sub->add_option("--data", o->data, "Training CSV (t,u,y or t,u,z)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--test", o->test, "Held-out CSV (t,u,y) used for the reported metrics")
      ->check(CLI::ExistingFile);
  sub->add_option("--holdout", o->holdout, "Score on the last N sequences instead of training on them");
  sub->add_option("--out", o->out, "Output directory")->capture_default_str();
  sub->add_option("--loss", o->loss, "Training criterion")
      ->capture_default_str()
      ->check(CLI::IsMember({"pem", "quantized", "mse"}));
  sub->add_option("--model", o->model, "Architecture")
      ->capture_default_str()
      ->check(CLI::IsMember({"wh", "pwh"}));
  sub->add_option("--n-b", o->n_b, "Numerator order of every G-block (default 8 wh, 12 pwh)");
  sub->add_option("--n-a", o->n_a, "Denominator order of every G-block (default 8 wh, 12 pwh)");
  sub->add_option("--hidden", o->hidden, "Hidden units per MLP")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--branches", o->branches, "Parallel branches (pwh)")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--noise-n-b", o->noise_n_b, "Numerator order of the inverse noise filter (pem)")
      ->capture_default_str();
  sub->add_option("--noise-n-a", o->noise_n_a, "Denominator order of the inverse noise filter (pem)")
      ->capture_default_str();
  sub->add_option("--lr", o->learning_rate, "Adam learning rate (default 1e-4 pem, 1e-3 otherwise)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--iterations", o->iterations,
                  "Adam iterations (default 40000 pem, 4000 quantized, 1000 mse)");
  sub->add_option("--seed", o->seed, "Seed for initialization and minibatches")->capture_default_str();
  sub->add_flag("--normalize,!--no-normalize", o->normalize,
                "Train in normalized units (quantized: input only)")
      ->capture_default_str();
  sub->add_option("--batch-size", o->batch_size, "Sequences per step; 0 uses the full batch")
      ->capture_default_str();
  sub->add_option("--plateau-window", o->plateau_window,
                  "Stop when the best loss improves less than --plateau-tol over this many iterations")
      ->capture_default_str();
  sub->add_option("--plateau-tol", o->plateau_tolerance, "Relative plateau tolerance")
      ->capture_default_str();
  sub->add_option("--sigma0", o->sigma0, "Initial measurement noise std (quantized)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--bins", o->bins, "Uniform quantizer bins (quantized)")->capture_default_str();
  sub->add_option("--q-min", o->q_min, "Quantizer lower range (quantized)")->capture_default_str();
  sub->add_option("--q-max", o->q_max, "Quantizer upper range (quantized)")->capture_default_str();
  sub->add_option("--log-every", o->log_every, "Print the loss every N iterations to stderr");
  return [o, sub] {
    TrainOptions opts = *o;
    const bool pem = opts.loss == "pem";
    if (sub->count("--lr") == 0) opts.learning_rate = pem ? 1e-4 : 1e-3;
    if (sub->count("--iterations") == 0) {
      opts.iterations = pem ? 40000 : (opts.loss == "quantized" ? 4000 : 1000);
    }
    train_command(opts);
  };
}

}  // namespace dynonet::cli
