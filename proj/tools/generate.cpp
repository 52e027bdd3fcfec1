#include <iostream>
#include <map>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "dynonet/datagen.hpp"
#include "dynonet/metrics.hpp"
#include "dynonet/model_io.hpp"

namespace dynonet::cli {

namespace {

struct GenerateOptions {
  std::string kind;
  std::size_t length = 0;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::size_t test_length = 0;
  double noise_std = 0.1;
  std::size_t realizations = 4;
  std::size_t test_realizations = 1;
  std::vector<double> rms_levels = default_rms_levels();
  double sigma_e = 0.1;
  double max_frequency = 0.1;
};

nlohmann::json tf_json(const TransferFunction& g) {
  return {{"b", g.b()}, {"a", g.a()}, {"n_k", g.n_k()}};
}

void generate(const GenerateOptions& o) {
  const std::filesystem::path dir(o.out);
  nlohmann::json meta{{"schema_version", 1}, {"kind", o.kind}, {"seed", o.seed},
                      {"T", o.length}};
  std::cout << "kind " << o.kind << ", seed " << o.seed << ", T " << o.length << "\n";

  if (o.kind == "wh-colored") {
    WhColoredConfig cfg;
    cfg.noise_std = o.noise_std;
    cfg.test_length = o.test_length;
    const auto ds = generate_wh_colored(o.seed, o.length, cfg);
    write_dataset_csv(dir / "train.csv", ds.u, ds.y);
    write_dataset_csv(dir / "test.csv", ds.u_test, ds.y_test);
    save_model(dir / "truth.json", ModelFile{ds.truth, {}, {}, {}});
    meta["noise_std"] = ds.noise_std;
    meta["white_noise_std"] = ds.white_std;
    meta["noise_filter"] = tf_json(ds.noise_filter);
    std::cout << "train: " << ds.u.length() << " samples, u std " << standard_deviation(ds.u)
              << ", y std " << standard_deviation(ds.y) << ", noise std " << ds.noise_std
              << "\n";
    std::cout << "test:  " << ds.u_test.length() << " samples (noiseless output)\n";
  } else if (o.kind == "pwh-quantized") {
    PwhQuantizedConfig cfg;
    cfg.sigma_e = o.sigma_e;
    cfg.max_frequency = o.max_frequency;
    cfg.test_realizations = o.test_realizations;
    const auto ds = generate_pwh_quantized(o.seed, o.length, o.rms_levels, o.realizations, cfg);
    write_dataset_csv(dir / "train.csv", ds.u, ds.z);
    write_dataset_csv(dir / "test.csv", ds.u_test, ds.y_test);
    save_model(dir / "truth.json", ModelFile{ds.truth, {}, ds.quantizer, std::log(ds.sigma_e)});
    meta["sigma_e"] = ds.sigma_e;
    meta["rms_levels"] = o.rms_levels;
    meta["realizations"] = o.realizations;
    meta["max_frequency"] = o.max_frequency;
    meta["quantizer"] = {{"thresholds", ds.quantizer.thresholds()}};
    std::map<int, std::size_t> histogram;
    for (int z : ds.z.data) ++histogram[z];
    std::cout << "train: " << ds.u.batch() << " sequences x " << ds.u.length()
              << " samples, bins used " << histogram.size() << " of " << ds.quantizer.bins()
              << "\n  bin counts:";
    for (const auto& [bin, count] : histogram) std::cout << " " << bin << ":" << count;
    std::cout << "\ntest:  " << ds.u_test.batch() << " sequences (latent noiseless output)\n";
  } else {
    throw UsageError("unknown dataset kind '" + o.kind + "'");
  }
  write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
  std::cout << "wrote " << (dir / "train.csv").string() << ", test.csv, truth.json, metadata.json\n";
}

}  // namespace

Action register_generate(CLI::App& app) {
  auto o = std::make_shared<GenerateOptions>();
  auto* sub = app.add_subcommand("generate", "Generate a synthetic benchmark dataset");
  sub->add_option("--kind", o->kind, "Dataset kind")
      ->required()
      ->check(CLI::IsMember({"wh-colored", "pwh-quantized"}));
  sub->add_option("--T", o->length, "Samples per sequence")->required()->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "Random seed")->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->capture_default_str();
  sub->add_option("--test-T", o->test_length, "Test samples (wh-colored; 0: same as --T)");
  sub->add_option("--noise-std", o->noise_std, "Colored noise standard deviation (wh-colored)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--realizations", o->realizations, "Phase realizations per rms level")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--test-realizations", o->test_realizations, "Held-out realizations per level")
      ->capture_default_str();
  sub->add_option("--rms-levels", o->rms_levels, "Multisine rms levels (pwh-quantized)")
      ->capture_default_str();
  sub->add_option("--sigma-e", o->sigma_e, "Measurement noise std before quantization")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--max-frequency", o->max_frequency, "Multisine band edge in cycles/sample")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.5));
  return [o] { generate(*o); };
}

}  // namespace dynonet::cli
