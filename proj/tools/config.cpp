#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "dynonet/model_io.hpp"

namespace dynonet::cli {

namespace {

std::string scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw UsageError("config key '" + key +
                   "' must be a number, string, boolean or array of those");
}

}  // namespace

void apply_json_config(CLI::App& sub, const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError("config file '" + path + "': unknown key '" + key + "' for " +
                       sub.get_name());
    }
    if (opt->count() > 0) continue;  // the command line wins
    std::vector<std::string> inputs;
    if (value.is_array()) {
      for (const auto& v : value) inputs.push_back(scalar(key, v));
    } else {
      inputs.push_back(scalar(key, value));
    }
    try {
      opt->add_result(inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

}  // namespace dynonet::cli
