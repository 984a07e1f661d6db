#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uq/conformal.hpp"
#include "uq/conv_model.hpp"
#include "uq/trainer.hpp"
#include "uq/uq_metrics.hpp"

namespace uqctl {

/// Binary P5, 8-bit. Values are windowed linearly from [lo, hi] to [0, 255],
/// clipped, and rounded half-up.
void export_pgm(const uq::Image& img, const std::filesystem::path& path, double lo, double hi);
void export_pgm(const uq::Mask& mask, const std::filesystem::path& path);
std::uint8_t pgm_level(double v, double lo, double hi);

struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::int64_t step_count = 0;
  std::int64_t best_step = 0;
};

/// One tensor per parameter (layer<i>_weight.t as out x in*9, layer<i>_bias.t as
/// 1 x out) plus model.json.
void save_checkpoint(const std::filesystem::path& dir, const uq::ConvModel& model,
                     const CheckpointInfo& info);
uq::ConvModel load_checkpoint(const std::filesystem::path& dir, CheckpointInfo* info = nullptr);

void write_train_log(const std::filesystem::path& path, const std::vector<uq::TrainLogEntry>& log);

nlohmann::json calibration_to_json(const uq::CalibrationResult& r);
uq::CalibrationResult calibration_from_json(const nlohmann::json& j);
void save_calibration(const std::filesystem::path& path, const uq::CalibrationResult& r);
uq::CalibrationResult load_calibration(const std::filesystem::path& path);

struct MetricsRow {
  uq::MetricsRecord record;
  double acceleration = 0.0;
  uq::HeadMode mode = uq::HeadMode::kQuantile;
};

inline constexpr const char* kMetricsHeader =
    "case_id,acceleration,mode,pearson,spearman,pearson_region,spearman_region,coverage,ssim,"
    "mean_rel_width_pct,skipped_patches";

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

std::string format_number(double v);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace uqctl
