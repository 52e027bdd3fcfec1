#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "dynonet/blocks.hpp"
#include "dynonet/quantized.hpp"
#include "dynonet/signal.hpp"
#include "dynonet/transfer_function.hpp"

namespace dynonet {

/// Malformed model JSON or dataset CSV.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything persisted in a model file. The optional members are present
/// for PEM-trained (noise_check) and quantized-trained (quantizer,
/// log_sigma_e) models.
struct ModelFile {
  DynoNetModel model;
  std::optional<TransferFunction> noise_check;
  std::optional<Quantizer> quantizer;
  std::optional<double> log_sigma_e;
};

/// Doubles are written with enough digits to round-trip exactly.
std::string model_to_json(const ModelFile& file);
ModelFile model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

/// Single-input single-output dataset. Rows are (t, u, y) or (t, u, z); a
/// row with t = 0 starts a new sequence and all sequences share one length.
struct Dataset {
  Signal u;
  std::optional<Signal> y;
  std::optional<BinSignal> z;
};

void write_dataset_csv(const std::filesystem::path& path, const Signal& u,
                       const Signal& y);
void write_dataset_csv(const std::filesystem::path& path, const Signal& u,
                       const BinSignal& z);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Reads a whole text file; throws IoError.
std::string read_text_file(const std::filesystem::path& path);
/// Writes a whole text file, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dynonet
