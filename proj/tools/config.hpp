#pragma once

// Experiment configuration: strict JSON schema, validation and the hash that
// tags every emitted artifact.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mfca::cli {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int n_frames = 2000;
  double cos_threshold = 0.95;
  std::vector<double> p_values = {1.0, 0.4, 0.2, 0.1, 0.08};
  int k_max = 10;
  int knn_k = 50;
  // +∞ stands for clean images; written as "inf" in JSON.
  std::vector<double> snr_values = {std::numeric_limits<double>::infinity(), 0.05, 0.02, 0.01};
  int image_size = 65;
  std::optional<std::string> output_dir;

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
};

// Parses and validates; unknown keys, wrong types and bad ranges throw
// InvalidArgument.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// All fields except output_dir, with sorted keys.
nlohmann::json to_json(const ExperimentConfig& config);
// FNV-1a 64 of the compact dump of to_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::string fnv_hex(const std::string& text);

}  // namespace mfca::cli
