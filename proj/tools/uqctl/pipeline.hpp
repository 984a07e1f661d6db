#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "uq/conv_model.hpp"

namespace uqctl {

enum class Split { kTrain, kVal, kCalib, kTest };
inline constexpr std::array<Split, 4> kAllSplits = {Split::kTrain, Split::kVal, Split::kCalib,
                                                    Split::kTest};
std::string_view split_name(Split s);
std::size_t split_size(const ExperimentConfig& c, Split s);

struct StageOptions {
  std::optional<uq::HeadMode> mode;  // unset: every mode in the config
  bool force = false;
  bool quiet = false;
};

// splitmix64 folded over the tags; distinct tag sequences give independent streams.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

std::string case_name(std::size_t index);
std::filesystem::path data_dir(const ExperimentConfig& c, double acceleration, Split s);
std::filesystem::path run_dir(const ExperimentConfig& c, double acceleration, uq::HeadMode mode);
std::filesystem::path report_dir(const ExperimentConfig& c);
std::filesystem::path manifest_path(const ExperimentConfig& c);

void cmd_generate(const ExperimentConfig& c, const StageOptions& opt = {});
void cmd_train(const ExperimentConfig& c, const StageOptions& opt = {});
void cmd_calibrate(const ExperimentConfig& c, const StageOptions& opt = {});
void cmd_evaluate(const ExperimentConfig& c, const StageOptions& opt = {});
void cmd_report(const ExperimentConfig& c, const StageOptions& opt = {});

/// generate, train, calibrate, evaluate and report in sequence.
void run_pipeline(const ExperimentConfig& c, const StageOptions& opt = {});

}  // namespace uqctl
