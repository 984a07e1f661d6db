#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <type_traits>

namespace uqctl {
namespace {

const std::set<std::string> kKnownKeys = {
    "output_dir",      "grid_size",     "accelerations",   "acs_fractions", "noise_std",
    "lesion_probability", "n_train",    "n_val",           "n_calib",       "n_test",
    "coverage_target", "delta",         "lambda_grid",     "train_steps",   "learning_rate",
    "batch",           "eval_interval", "hidden_channels", "seed",          "modes",
    "anomaly_reference_acceleration"};

template <typename T>
void read(const nlohmann::json& j, const char* key, T& into) {
  if (!j.contains(key)) return;
  if constexpr (std::is_integral_v<T>) {
    const auto& v = j.at(key);
    if (!v.is_number_integer())
      throw ConfigError(std::string("config key '") + key + "' must be an integer");
    if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
      throw ConfigError(std::string("config key '") + key + "' must be non-negative");
  }
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

std::string acceleration_label(double acceleration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", acceleration);
  return buf;
}

double ExperimentConfig::acs_fraction_for(double acceleration) const {
  const auto it = acs_fractions.find(acceleration_label(acceleration));
  if (it == acs_fractions.end())
    throw ConfigError("no acs_fraction configured for acceleration " + acceleration_label(acceleration));
  return it->second;
}

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig c;
  std::string out_dir = c.output_dir.string();
  read(j, "output_dir", out_dir);
  c.output_dir = out_dir;
  if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
  read(j, "grid_size", c.grid_size);
  read(j, "accelerations", c.accelerations);
  if (j.contains("acs_fractions")) {
    std::map<std::string, double> raw;
    read(j, "acs_fractions", raw);
    c.acs_fractions.clear();
    for (const auto& [k, v] : raw) {
      double r = 0.0;
      try {
        r = std::stod(k);
      } catch (...) {
        throw ConfigError("acs_fractions key '" + k + "' is not a number");
      }
      c.acs_fractions[acceleration_label(r)] = v;
    }
  }
  read(j, "noise_std", c.noise_std);
  read(j, "lesion_probability", c.lesion_probability);
  read(j, "n_train", c.n_train);
  read(j, "n_val", c.n_val);
  read(j, "n_calib", c.n_calib);
  read(j, "n_test", c.n_test);
  read(j, "coverage_target", c.coverage_target);
  read(j, "delta", c.delta);
  if (j.contains("lambda_grid")) {
    const auto& g = j.at("lambda_grid");
    if (!g.is_object()) throw ConfigError("lambda_grid must be an object {lo, hi, step}");
    read(g, "lo", c.lambda_grid.lo);
    read(g, "hi", c.lambda_grid.hi);
    read(g, "step", c.lambda_grid.step);
  }
  read(j, "train_steps", c.train_steps);
  read(j, "learning_rate", c.learning_rate);
  read(j, "batch", c.batch);
  read(j, "eval_interval", c.eval_interval);
  read(j, "hidden_channels", c.hidden_channels);
  read(j, "seed", c.seed);
  if (j.contains("modes")) {
    std::vector<std::string> names;
    read(j, "modes", names);
    c.modes.clear();
    try {
      for (const auto& n : names) c.modes.push_back(uq::head_mode_from_string(n));
    } catch (const uq::ParameterError& e) {
      throw ConfigError(e.what());
    }
  }
  read(j, "anomaly_reference_acceleration", c.anomaly_reference_acceleration);
  validate(c);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["output_dir"] = c.output_dir.string();
  j["grid_size"] = c.grid_size;
  j["accelerations"] = c.accelerations;
  j["acs_fractions"] = c.acs_fractions;
  j["noise_std"] = c.noise_std;
  j["lesion_probability"] = c.lesion_probability;
  j["n_train"] = c.n_train;
  j["n_val"] = c.n_val;
  j["n_calib"] = c.n_calib;
  j["n_test"] = c.n_test;
  j["coverage_target"] = c.coverage_target;
  j["delta"] = c.delta;
  j["lambda_grid"] = {{"lo", c.lambda_grid.lo}, {"hi", c.lambda_grid.hi}, {"step", c.lambda_grid.step}};
  j["train_steps"] = c.train_steps;
  j["learning_rate"] = c.learning_rate;
  j["batch"] = c.batch;
  j["eval_interval"] = c.eval_interval;
  j["hidden_channels"] = c.hidden_channels;
  j["seed"] = c.seed;
  std::vector<std::string> modes;
  for (auto m : c.modes) modes.push_back(m == uq::HeadMode::kQuantile ? "qr" : "resm");
  j["modes"] = modes;
  j["anomaly_reference_acceleration"] = c.anomaly_reference_acceleration;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void validate(const ExperimentConfig& c) {
  if (!uq::is_power_of_two(c.grid_size) || c.grid_size < 16)
    throw ConfigError("grid_size must be a power of two >= 16");
  if (c.accelerations.empty()) throw ConfigError("accelerations must not be empty");
  for (double r : c.accelerations) {
    if (!(r >= 1.0)) throw ConfigError("accelerations must be >= 1");
    const double f = c.acs_fraction_for(r);
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("acs_fraction must lie in (0, 1]");
  }
  if (!(c.noise_std >= 0.0)) throw ConfigError("noise_std must be non-negative");
  if (!(c.lesion_probability >= 0.0 && c.lesion_probability <= 1.0))
    throw ConfigError("lesion_probability must lie in [0, 1]");
  if (c.n_train == 0 || c.n_val == 0 || c.n_calib == 0 || c.n_test == 0)
    throw ConfigError("split sizes must be positive");
  if (!(c.coverage_target > 0.0 && c.coverage_target < 1.0))
    throw ConfigError("coverage_target must lie in (0, 1)");
  if (!(c.delta > 0.0 && c.delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");
  try {
    (void)c.lambda_grid.size();
  } catch (const uq::ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (c.train_steps < 0) throw ConfigError("train_steps must be non-negative");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (c.batch == 0 || c.eval_interval <= 0 || c.hidden_channels == 0)
    throw ConfigError("batch, eval_interval and hidden_channels must be positive");
  if (c.modes.empty()) throw ConfigError("modes must not be empty");
}

std::string config_hash(const ExperimentConfig& c) {
  auto j = config_to_json(c);
  j.erase("output_dir");  // location, not content
  const std::string canonical = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace uqctl
