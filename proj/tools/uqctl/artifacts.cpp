#include "artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "uq/tensor_io.hpp"

namespace uqctl {
namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw uq::DataError("missing file " + path.string());
  try {
    nlohmann::json j;
    f >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw uq::DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw uq::DataError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

std::uint8_t pgm_level(double v, double lo, double hi) {
  const double t = (v - lo) / (hi - lo) * 255.0;
  if (!(t > 0.0)) return 0;
  if (t >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::floor(t + 0.5));
}

namespace {

void write_pgm_bytes(const fs::path& path, std::size_t rows, std::size_t cols,
                     const std::vector<std::uint8_t>& px) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw uq::DataError("cannot write " + path.string());
  f << "P5\n" << cols << ' ' << rows << "\n255\n";
  f.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!f) throw uq::DataError("short write to " + path.string());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void export_pgm(const uq::Image& img, const fs::path& path, double lo, double hi) {
  if (!(hi > lo)) throw uq::ParameterError("PGM window needs hi > lo");
  std::vector<std::uint8_t> px(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) px[i] = pgm_level(img[i], lo, hi);
  write_pgm_bytes(path, img.rows(), img.cols(), px);
}

void export_pgm(const uq::Mask& mask, const fs::path& path) {
  std::vector<std::uint8_t> px(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) px[i] = mask[i] ? 255 : 0;
  write_pgm_bytes(path, mask.rows(), mask.cols(), px);
}

void save_checkpoint(const fs::path& dir, const uq::ConvModel& model, const CheckpointInfo& info) {
  fs::create_directories(dir);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    uq::Image w(layer.out_channels, layer.in_channels * 9, layer.weight);
    uq::Image b(1, layer.out_channels, layer.bias);
    uq::save_tensor(dir / ("layer" + std::to_string(l) + "_weight.t"), w);
    uq::save_tensor(dir / ("layer" + std::to_string(l) + "_bias.t"), b);
  }
  nlohmann::json j;
  j["channel_plan"] = model.channel_plan();
  j["mode"] = uq::to_string(model.mode);
  j["leaky_slope"] = model.leaky_slope;
  j["seed"] = info.seed;
  j["step_count"] = info.step_count;
  j["best_step"] = info.best_step;
  write_json(dir / "model.json", j);
}

uq::ConvModel load_checkpoint(const fs::path& dir, CheckpointInfo* info) {
  const auto j = read_json(dir / "model.json");
  uq::ConvModel model;
  std::vector<std::size_t> plan;
  try {
    model.mode = uq::head_mode_from_string(j.at("mode").get<std::string>());
    model.leaky_slope = j.at("leaky_slope").get<double>();
    plan = j.at("channel_plan").get<std::vector<std::size_t>>();
    if (info) {
      info->seed = j.at("seed").get<std::uint64_t>();
      info->step_count = j.at("step_count").get<std::int64_t>();
      info->best_step = j.at("best_step").get<std::int64_t>();
    }
  } catch (const std::exception& e) {
    throw uq::DataError("bad model.json in " + dir.string() + ": " + e.what());
  }
  if (plan.size() < 2) throw uq::DataError("channel_plan too short in " + dir.string());
  for (std::size_t l = 0; l + 1 < plan.size(); ++l) {
    uq::ConvLayer layer(plan[l], plan[l + 1]);
    const auto w = uq::load_image(dir / ("layer" + std::to_string(l) + "_weight.t"));
    const auto b = uq::load_image(dir / ("layer" + std::to_string(l) + "_bias.t"));
    if (w.rows() != layer.out_channels || w.cols() != layer.in_channels * 9 || b.size() != layer.out_channels)
      throw uq::DataError("parameter tensor shape mismatch for layer " + std::to_string(l));
    layer.weight.assign(w.begin(), w.end());
    layer.bias.assign(b.begin(), b.end());
    model.layers.push_back(std::move(layer));
  }
  return model;
}

void write_train_log(const fs::path& path, const std::vector<uq::TrainLogEntry>& log) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw uq::DataError("cannot write " + path.string());
  f << "step,train_loss,val_loss,best_val_loss\n";
  for (const auto& e : log)
    f << e.step << ',' << format_number(e.train_loss) << ',' << format_number(e.val_loss) << ','
      << format_number(e.best_val_loss) << '\n';
}

nlohmann::json calibration_to_json(const uq::CalibrationResult& r) {
  nlohmann::json j;
  j["lambda_star"] = r.lambda_star;
  j["alpha"] = r.alpha;
  j["delta"] = r.delta;
  j["n_images"] = r.n_images;
  j["n_pixels_total"] = r.n_pixels_total;
  auto curve = nlohmann::json::array();
  for (const auto& p : r.risk_curve) curve.push_back({p.lambda, p.r_hat, p.r_plus});
  j["risk_curve"] = curve;
  return j;
}

uq::CalibrationResult calibration_from_json(const nlohmann::json& j) {
  uq::CalibrationResult r;
  try {
    r.lambda_star = j.at("lambda_star").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.delta = j.at("delta").get<double>();
    r.n_images = j.at("n_images").get<std::size_t>();
    r.n_pixels_total = j.at("n_pixels_total").get<std::size_t>();
    for (const auto& p : j.at("risk_curve"))
      r.risk_curve.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw uq::DataError(std::string("malformed calibration result: ") + e.what());
  }
  return r;
}

void save_calibration(const fs::path& path, const uq::CalibrationResult& r) {
  write_json(path, calibration_to_json(r));
}

uq::CalibrationResult load_calibration(const fs::path& path) {
  return calibration_from_json(read_json(path));
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw uq::DataError("cannot write " + path.string());
  f << kMetricsHeader << '\n';
  for (const auto& row : rows) {
    const auto& m = row.record;
    f << m.case_id << ',' << acceleration_label(row.acceleration) << ',' << uq::to_string(row.mode)
      << ',' << format_number(m.pearson) << ',' << format_number(m.spearman) << ','
      << format_number(m.pearson_region) << ',' << format_number(m.spearman_region) << ','
      << format_number(m.coverage) << ',' << format_number(m.ssim) << ','
      << format_number(m.mean_rel_width_pct) << ',' << m.skipped_patches << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw uq::DataError("missing metrics file " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != kMetricsHeader)
    throw uq::DataError("unexpected metrics header in " + path.string());
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 11)
      throw uq::DataError(path.string() + ":" + std::to_string(line_no) + ": expected 11 columns");
    MetricsRow row;
    try {
      row.record.case_id = cells[0];
      row.acceleration = std::stod(cells[1]);
      row.mode = uq::head_mode_from_string(cells[2]);
      row.record.pearson = std::stod(cells[3]);
      row.record.spearman = std::stod(cells[4]);
      row.record.pearson_region = std::stod(cells[5]);
      row.record.spearman_region = std::stod(cells[6]);
      row.record.coverage = std::stod(cells[7]);
      row.record.ssim = std::stod(cells[8]);
      row.record.mean_rel_width_pct = std::stod(cells[9]);
      row.record.skipped_patches = std::stoul(cells[10]);
    } catch (const std::exception& e) {
      throw uq::DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace uqctl
