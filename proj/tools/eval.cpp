#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "dynonet/metrics.hpp"
#include "dynonet/model_io.hpp"
#include "dynonet/pem.hpp"

namespace dynonet::cli {

namespace {

struct EvalOptions {
  std::string model;
  std::string data;
  std::string bode;
  std::string truth;
  int bode_layer = -1;
  std::size_t bode_points = 500;
  double f_min = 1e-3;
  double f_max = 0.5;
  bool json = false;
};

TransferFunction tf_from(const nlohmann::json& j) {
  return {j.at("b").get<std::vector<double>>(), j.at("a").get<std::vector<double>>(),
          j.at("n_k").get<std::size_t>()};
}

// Filter whose magnitude goes into the Bode CSV: the estimated noise model H
// by default, or the (0, 0) cell of a G-block layer.
TransferFunction bode_filter(const ModelFile& file, int layer) {
  if (layer >= 0) {
    const auto l = static_cast<std::size_t>(layer);
    if (l >= file.model.layers().size() ||
        !std::holds_alternative<GBlockSpec>(file.model.layers()[l].spec)) {
      throw UsageError("--bode-layer " + std::to_string(layer) + " is not a G-block layer");
    }
    return file.model.gblock(l).cell(0, 0);
  }
  if (!file.noise_check) {
    throw UsageError("the model has no noise model; use --bode-layer to pick a G-block");
  }
  PemModel pem(file.model, file.noise_check->n_b(), file.noise_check->n_a());
  pem.set_noise_check(*file.noise_check);
  return pem.estimated_noise_filter();
}

void eval_command(const EvalOptions& o) {
  const ModelFile file = load_model(o.model);
  const Dataset data = read_dataset_csv(o.data);
  if (file.model.input_channels() != 1 || file.model.output_channels() != 1) {
    throw UsageError("model is " + std::to_string(file.model.input_channels()) + "-input " +
                     std::to_string(file.model.output_channels()) +
                     "-output; CSV data is single-input single-output");
  }
  if (!data.y) throw UsageError("eval needs a t,u,y dataset");

  const Signal y_sim = file.model.simulate_physical(data.u);
  const double fit = fit_index(*data.y, y_sim);
  const double err = rmse(*data.y, y_sim);
  if (o.json) {
    std::cout << nlohmann::json{{"schema_version", 1}, {"fit", fit}, {"rmse", err}}.dump(2)
              << "\n";
  } else {
    std::cout << "fit " << fit << " %\nrmse " << err << "\n";
  }

  if (!o.bode.empty()) {
    const TransferFunction g = bode_filter(file, o.bode_layer);
    std::optional<TransferFunction> truth;
    if (!o.truth.empty()) {
      const auto meta = nlohmann::json::parse(read_text_file(o.truth));
      if (!meta.contains("noise_filter")) {
        throw UsageError("--truth metadata has no noise_filter entry");
      }
      truth = tf_from(meta.at("noise_filter"));
    }
    std::ostringstream csv;
    csv.precision(12);
    csv << "frequency,magnitude_db" << (truth ? ",magnitude_db_true" : "") << "\n";
    const std::size_t n = std::max<std::size_t>(o.bode_points, 2);
    for (std::size_t k = 0; k < n; ++k) {
      const double f = o.f_min + (o.f_max - o.f_min) * static_cast<double>(k) /
                                     static_cast<double>(n - 1);
      csv << f << "," << magnitude_db(g, f);
      if (truth) csv << "," << magnitude_db(*truth, f);
      csv << "\n";
    }
    write_text_file(o.bode, csv.str());
    if (!o.json) std::cout << "wrote " << o.bode << "\n";
  }
}

}  // namespace

Action register_eval(CLI::App& app) {
  auto o = std::make_shared<EvalOptions>();
  auto* sub = app.add_subcommand("eval", "Open-loop simulation metrics of a trained model");
  sub->add_option("--model", o->model, "Model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--data", o->data, "CSV dataset (t,u,y)")->required()->check(CLI::ExistingFile);
  sub->add_option("--bode", o->bode, "Write a magnitude CSV of the noise model (or --bode-layer)");
  sub->add_option("--truth", o->truth, "Dataset metadata JSON adding the true noise filter column")
      ->check(CLI::ExistingFile);
  sub->add_option("--bode-layer", o->bode_layer, "G-block layer index to export instead");
  sub->add_option("--bode-points", o->bode_points, "Frequency grid size")->capture_default_str();
  sub->add_option("--f-min", o->f_min, "Lowest frequency, cycles/sample")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.5));
  sub->add_option("--f-max", o->f_max, "Highest frequency, cycles/sample")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.5));
  sub->add_flag("--json", o->json, "Print metrics as JSON");
  return [o] { eval_command(*o); };
}

}  // namespace dynonet::cli
