#pragma once

#include <CLI11.hpp>

#include <functional>
#include <stdexcept>
#include <string>

namespace dynonet::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitIo = 3;

// Invalid combination of otherwise well-formed options.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric self-check (gradcheck) found a mismatch.
class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fills options of `sub` that were not given on the command line from a flat
// JSON object keyed by long option name. Unknown keys are a UsageError.
void apply_json_config(CLI::App& sub, const std::string& path);

// Each register_* call adds one subcommand and returns the action to run
// once parsing succeeded.
using Action = std::function<void()>;

Action register_generate(CLI::App& app);
Action register_train(CLI::App& app);
Action register_eval(CLI::App& app);
Action register_gradcheck(CLI::App& app);

}  // namespace dynonet::cli
