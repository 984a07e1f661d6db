#include <cstdio>
#include <exception>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "config.hpp"
#include "pipeline.hpp"
#include "uq/errors.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kData = 3,
  kTraining = 4,
  kInfeasible = 5,
};

int run(const std::string& command, const std::string& config_path, const std::string& mode, bool force) {
  const auto config = uqctl::load_config(config_path);
  uqctl::StageOptions opt;
  opt.force = force;
  if (!mode.empty()) {
    try {
      opt.mode = uq::head_mode_from_string(mode);
    } catch (const uq::ParameterError& e) {
      throw uqctl::ConfigError(e.what());
    }
  }
  if (command == "generate") uqctl::cmd_generate(config, opt);
  else if (command == "train") uqctl::cmd_train(config, opt);
  else if (command == "calibrate") uqctl::cmd_calibrate(config, opt);
  else if (command == "evaluate") uqctl::cmd_evaluate(config, opt);
  else if (command == "report") uqctl::cmd_report(config, opt);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uqctl: calibrated uncertainty maps for undersampled reconstructions"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string mode;
  bool force = false;
  const std::pair<const char*, const char*> subcommands[] = {
      {"generate", "simulate phantoms, k-space and zero-filled reconstructions"},
      {"train", "train the uncertainty models"},
      {"calibrate", "select the interval scaling on the calibration split"},
      {"evaluate", "score calibrated intervals on the test split"},
      {"report", "aggregate per-case metrics into summary tables"}};
  for (const auto& [name, description] : subcommands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--mode", mode, "restrict to one head mode: qr or resm");
    sub->add_flag("--force", force, "overwrite existing outputs");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, config_path, mode, force);
  } catch (const uqctl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const uq::CalibrationInfeasibleError& e) {
    std::fprintf(stderr, "calibration infeasible: %s\n  corrected risk at the grid upper bound: %.6f\n",
                 e.what(), e.risk_at_hi());
    return kInfeasible;
  } catch (const uq::TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return kTraining;
  } catch (const uq::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const uq::FormatError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOther;
  }
}
