#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "commands.hpp"
#include "dynonet/model_io.hpp"
#include "dynonet/optim.hpp"

int main(int argc, char** argv) {
  using namespace dynonet::cli;
  CLI::App app{"dynoNet: differentiable transfer-function blocks for system identification",
               "dynonet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  struct Entry {
    CLI::App* sub;
    Action action;
    std::string config;
  };
  std::vector<Entry> entries;
  for (auto* reg : {register_generate, register_train, register_eval, register_gradcheck}) {
    Action action = reg(app);
    entries.push_back({app.get_subcommands({}).back(), std::move(action), {}});
  }
  for (auto& e : entries) {
    e.sub->add_option("--config", e.config, "JSON file of option values; flags override it");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto& e : entries) {
      if (!e.sub->parsed()) continue;
      if (!e.config.empty()) apply_json_config(*e.sub, e.config);
      e.action();
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dynonet::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const dynonet::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CheckFailed& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const dynonet::TrainingDivergedError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const dynonet::DivergenceError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
