#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uq/conformal.hpp"
#include "uq/conv_model.hpp"

namespace uqctl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::filesystem::path output_dir = "uq_out";
  std::size_t grid_size = 64;
  std::vector<double> accelerations = {2, 4, 6, 8, 10};
  std::map<std::string, double> acs_fractions = {
      {"2", 0.16}, {"4", 0.08}, {"6", 0.053}, {"8", 0.04}, {"10", 0.03}};
  double noise_std = 0.01;
  double lesion_probability = 0.3;
  std::size_t n_train = 200;
  std::size_t n_val = 50;
  std::size_t n_calib = 200;
  std::size_t n_test = 100;
  double coverage_target = 0.90;
  double delta = 0.1;
  uq::LambdaGrid lambda_grid{0.0, 5.0, 0.01};
  std::int64_t train_steps = 1500;
  double learning_rate = 3e-4;
  std::size_t batch = 1;
  std::int64_t eval_interval = 100;
  std::size_t hidden_channels = 16;
  std::uint64_t seed = 7;
  std::vector<uq::HeadMode> modes = {uq::HeadMode::kQuantile, uq::HeadMode::kResidual};
  double anomaly_reference_acceleration = 4;

  double acs_fraction_for(double acceleration) const;
  double alpha() const { return 1.0 - coverage_target; }
};

/// Canonical label for an acceleration ("4", "2.5").
std::string acceleration_label(double acceleration);

/// Relative output_dir entries resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& c);

/// FNV-1a over the canonical (sorted-key) JSON of the resolved config.
std::string config_hash(const ExperimentConfig& c);

}  // namespace uqctl
