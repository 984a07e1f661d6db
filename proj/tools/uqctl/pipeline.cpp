#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>

#include "artifacts.hpp"
#include "uq/acquisition.hpp"
#include "uq/conformal.hpp"
#include "uq/parallel.hpp"
#include "uq/phantom.hpp"
#include "uq/sampling.hpp"
#include "uq/tensor_io.hpp"
#include "uq/trainer.hpp"
#include "uq/uq_metrics.hpp"

#ifndef UQCTL_VERSION
#define UQCTL_VERSION "0.0.0"
#endif

namespace uqctl {
namespace fs = std::filesystem;

namespace {

// Stream identifiers for derive_seed.
enum Stream : std::uint64_t {
  kAnatomy = 1,
  kLesionDraw = 2,
  kLesionShape = 3,
  kLesionTexture = 4,
  kNoise = 5,
  kInit = 6,
  kShuffle = 7,
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mode_tag(uq::HeadMode m) { return m == uq::HeadMode::kQuantile ? 1 : 2; }

// Accelerations may be fractional; tag them by their value in hundredths.
std::uint64_t accel_tag(double r) { return static_cast<std::uint64_t>(std::llround(r * 100.0)); }

std::vector<uq::HeadMode> selected_modes(const ExperimentConfig& c, const StageOptions& opt) {
  if (opt.mode) return {*opt.mode};
  return c.modes;
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Progress {
 public:
  explicit Progress(bool quiet) : quiet_(quiet) {}
  template <typename... Args>
  void operator()(const char* fmt, Args... args) const {
    if (quiet_) return;
    std::lock_guard<std::mutex> lock(mu_);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
  }

 private:
  bool quiet_;
  mutable std::mutex mu_;
};

nlohmann::json load_manifest(const ExperimentConfig& c) {
  const auto path = manifest_path(c);
  if (!fs::exists(path)) return nlohmann::json::object();
  return read_json(path);
}

// Every stage rewrites the manifest header so the file always reflects the config
// that produced its newest outputs.
void update_manifest(const ExperimentConfig& c, const std::string& stage, nlohmann::json entry) {
  auto m = load_manifest(c);
  const auto hash = config_hash(c);
  if (m.contains("config_hash") && m["config_hash"] != hash && stage != "generate")
    std::fprintf(stderr, "warning: manifest config hash %s differs from current config %s\n",
                 m["config_hash"].get<std::string>().c_str(), hash.c_str());
  m["config_hash"] = hash;
  m["config"] = config_to_json(c);
  m["version"] = UQCTL_VERSION;
  entry["timestamp"] = timestamp_utc();
  auto& slot = m["stages"][stage];
  if (entry.contains("runs") && slot.is_object() && slot.contains("runs")) {
    // Per-mode invocations accumulate rather than overwrite each other.
    auto runs = slot["runs"];
    for (const auto& [k, v] : entry["runs"].items()) runs[k] = v;
    entry["runs"] = runs;
  }
  slot = entry;
  write_json(manifest_path(c), m);
}

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw uq::DataError(std::string("missing ") + what + ": " + p.string());
}

fs::path case_dir(const ExperimentConfig& c, double r, Split s, std::size_t i) {
  return data_dir(c, r, s) / case_name(i);
}

std::vector<uq::TrainingPair> load_pairs(const ExperimentConfig& c, double r, Split s) {
  require_dir(data_dir(c, r, s), "dataset split");
  const std::size_t n = split_size(c, s);
  return uq::parallel_map<uq::TrainingPair>(n, [&](std::size_t i) {
    const auto dir = case_dir(c, r, s, i);
    return uq::TrainingPair{uq::load_image(dir / "x.t"), uq::load_image(dir / "y.t")};
  });
}

std::string run_name(double r, uq::HeadMode m) {
  return "R" + acceleration_label(r) + "_" + uq::to_string(m);
}

// ---------------------------------------------------------------- generate

struct GeneratedCase {
  bool lesion = false;
};

uq::Image ground_truth_for(const ExperimentConfig& c, Split s, std::size_t i, bool* lesion) {
  const auto split_tag = static_cast<std::uint64_t>(s);
  const auto ellipses = uq::jittered_head_ellipses(derive_seed(c.seed, {kAnatomy, split_tag, i}));
  auto img = uq::shepp_logan(c.grid_size, c.grid_size, ellipses);
  std::mt19937_64 draw(derive_seed(c.seed, {kLesionDraw, split_tag, i}));
  const bool has_lesion = std::uniform_real_distribution<double>(0.0, 1.0)(draw) < c.lesion_probability;
  if (has_lesion) {
    const auto lesion = uq::random_lesion(derive_seed(c.seed, {kLesionShape, split_tag, i}));
    img = uq::inject_lesion(img, lesion, derive_seed(c.seed, {kLesionTexture, split_tag, i}));
  }
  *lesion = has_lesion;
  return img;
}

// ---------------------------------------------------------------- evaluate helpers

constexpr double kHistLo = -1.0;
constexpr std::size_t kHistBins = 20;

std::vector<std::size_t> pearson_histogram(const std::vector<double>& values) {
  std::vector<std::size_t> counts(kHistBins, 0);
  const double width = 2.0 / kHistBins;
  for (double v : values) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((v - kHistLo) / width));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(kHistBins) - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  return counts;
}

void write_histogram(const fs::path& path, const std::vector<std::size_t>& counts) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw uq::DataError("cannot write " + path.string());
  f << "bin_lo,bin_hi,count\n";
  const double width = 2.0 / kHistBins;
  for (std::size_t b = 0; b < counts.size(); ++b)
    f << format_number(kHistLo + b * width) << ',' << format_number(kHistLo + (b + 1) * width) << ','
      << counts[b] << '\n';
}

struct EvalOutcome {
  MetricsRow row;
  nlohmann::json access;
};

void write_anomaly_masks(const ExperimentConfig& c, uq::HeadMode mode, const Progress& say) {
  const double ref = c.anomaly_reference_acceleration;
  const bool have_ref = std::find(c.accelerations.begin(), c.accelerations.end(), ref) != c.accelerations.end();
  if (!have_ref || c.accelerations.size() < 2) return;

  const auto ref_maps = run_dir(c, ref, mode) / "maps";
  double threshold = 0.0;
  for (std::size_t i = 0; i < c.n_test; ++i)
    threshold = std::max(threshold, uq::grid_max(uq::load_image(ref_maps / (case_name(i) + "_q.t"))));

  for (double r : c.accelerations) {
    const auto out = run_dir(c, r, mode) / "anomaly";
    fs::create_directories(out);
    write_json(out / "threshold.json", {{"reference_acceleration", ref}, {"threshold", threshold}});
    const auto maps = run_dir(c, r, mode) / "maps";
    for (std::size_t i = 0; i < c.n_test; ++i) {
      const auto q = uq::load_image(maps / (case_name(i) + "_q.t"));
      export_pgm(uq::threshold_overlay_mask(q, threshold), out / (case_name(i) + ".pgm"));
    }
  }
  say("[evaluate] %s anomaly masks at threshold %.6g", uq::to_string(mode).c_str(), threshold);
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
};

// Population standard deviation; a single value has std 0.
Stats stats_of(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(base);
  for (auto t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kCalib: return "calib";
    case Split::kTest: return "test";
  }
  return "?";
}

std::size_t split_size(const ExperimentConfig& c, Split s) {
  switch (s) {
    case Split::kTrain: return c.n_train;
    case Split::kVal: return c.n_val;
    case Split::kCalib: return c.n_calib;
    case Split::kTest: return c.n_test;
  }
  return 0;
}

std::string case_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "case_%05zu", index);
  return buf;
}

fs::path data_dir(const ExperimentConfig& c, double acceleration, Split s) {
  return c.output_dir / "data" / ("R" + acceleration_label(acceleration)) / std::string(split_name(s));
}

fs::path run_dir(const ExperimentConfig& c, double acceleration, uq::HeadMode mode) {
  return c.output_dir / "runs" / run_name(acceleration, mode);
}

fs::path report_dir(const ExperimentConfig& c) { return c.output_dir / "report"; }

fs::path manifest_path(const ExperimentConfig& c) { return c.output_dir / "manifest.json"; }

void cmd_generate(const ExperimentConfig& c, const StageOptions& opt) {
  const Progress say(opt.quiet);
  const auto root = c.output_dir / "data";
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!opt.force)
      throw uq::DataError("refusing to overwrite existing dataset " + root.string() + " (use --force)");
    fs::remove_all(root);
  }

  nlohmann::json seeds = nlohmann::json::object();
  for (double r : c.accelerations) {
    const auto mask = uq::make_cartesian_mask(c.grid_size, r, c.acs_fraction_for(r));
    const auto mask_row = mask.as_row_image();
    for (Split s : kAllSplits) {
      const auto dir = data_dir(c, r, s);
      fs::create_directories(dir);
      const std::size_t n = split_size(c, s);
      uq::parallel_map<GeneratedCase>(n, [&](std::size_t i) {
        GeneratedCase g;
        const auto gt = ground_truth_for(c, s, i, &g.lesion);
        const auto noise_seed = derive_seed(c.seed, {kNoise, static_cast<std::uint64_t>(s), i});
        const auto rec = uq::acquire(gt, mask, c.noise_std, noise_seed);
        const auto cd = dir / case_name(i);
        fs::create_directories(cd);
        uq::save_tensor(cd / "y.t", rec.ground_truth);
        uq::save_tensor(cd / "x.t", rec.recon);
        uq::save_tensor(cd / "mask.t", mask_row);
        write_json(cd / "meta.json", {{"acceleration", r},
                                      {"acs_fraction", c.acs_fraction_for(r)},
                                      {"noise_std", c.noise_std},
                                      {"seed", noise_seed},
                                      {"lesion", g.lesion}});
        return g;
      });
      say("[generate] R=%s %s: %zu cases", acceleration_label(r).c_str(),
          std::string(split_name(s)).c_str(), n);
    }
  }
  seeds["base"] = c.seed;
  update_manifest(c, "generate", {{"seeds", seeds}, {"outputs", root.string()}});
}

void cmd_train(const ExperimentConfig& c, const StageOptions& opt) {
  const Progress say(opt.quiet);
  struct Job {
    double r;
    uq::HeadMode mode;
  };
  std::vector<Job> jobs;
  for (double r : c.accelerations)
    for (auto m : selected_modes(c, opt)) jobs.push_back({r, m});

  std::map<double, std::pair<std::vector<uq::TrainingPair>, std::vector<uq::TrainingPair>>> data;
  for (double r : c.accelerations)
    data[r] = {load_pairs(c, r, Split::kTrain), load_pairs(c, r, Split::kVal)};

  struct Trained {
    std::uint64_t init_seed = 0;
    std::uint64_t shuffle_seed = 0;
    std::int64_t best_step = 0;
  };
  const auto results = uq::parallel_map<Trained>(jobs.size(), [&](std::size_t j) {
    const auto [r, mode] = jobs[j];
    Trained t;
    t.init_seed = derive_seed(c.seed, {kInit, accel_tag(r), mode_tag(mode)});
    t.shuffle_seed = derive_seed(c.seed, {kShuffle, accel_tag(r), mode_tag(mode)});
    uq::TrainConfig tc;
    tc.coverage_target = c.coverage_target;
    tc.learning_rate = c.learning_rate;
    tc.steps = c.train_steps;
    tc.batch = c.batch;
    tc.seed = t.shuffle_seed;
    tc.mode = mode;
    tc.eval_interval = c.eval_interval;
    const auto initial = uq::make_model(mode, t.init_seed, c.hidden_channels);
    const auto& [train_set, val_set] = data.at(r);
    const auto res = uq::train(initial, train_set, val_set, tc);
    t.best_step = res.best_step;

    const auto dir = run_dir(c, r, mode);
    fs::create_directories(dir);
    save_checkpoint(dir / "checkpoint", res.model, {t.init_seed, c.train_steps, res.best_step});
    write_train_log(dir / "train_loss.csv", res.log);
    say("[train] %s: best step %lld, val loss %.6g", run_name(r, mode).c_str(),
        static_cast<long long>(res.best_step), res.log.empty() ? 0.0 : res.log.back().best_val_loss);
    return t;
  });

  nlohmann::json runs = nlohmann::json::object();
  for (std::size_t j = 0; j < jobs.size(); ++j)
    runs[run_name(jobs[j].r, jobs[j].mode)] = {{"init_seed", results[j].init_seed},
                                               {"shuffle_seed", results[j].shuffle_seed},
                                               {"best_step", results[j].best_step},
                                               {"checkpoint", (run_dir(c, jobs[j].r, jobs[j].mode) / "checkpoint").string()}};
  update_manifest(c, "train", {{"runs", runs}});
}

void cmd_calibrate(const ExperimentConfig& c, const StageOptions& opt) {
  const Progress say(opt.quiet);
  nlohmann::json runs = nlohmann::json::object();
  for (double r : c.accelerations) {
    require_dir(data_dir(c, r, Split::kCalib), "calibration split");
    for (auto mode : selected_modes(c, opt)) {
      const auto dir = run_dir(c, r, mode);
      require_dir(dir / "checkpoint", "checkpoint");
      const auto model = load_checkpoint(dir / "checkpoint");
      const auto cases = uq::parallel_map<uq::CalibrationCase>(c.n_calib, [&](std::size_t i) {
        const auto cd = case_dir(c, r, Split::kCalib, i);
        uq::CalibrationCase cc;
        cc.id = case_name(i);
        cc.x = uq::load_image(cd / "x.t");
        cc.fields = uq::forward(model, cc.x);
        cc.y = uq::load_image(cd / "y.t");
        return cc;
      });
      uq::CalibrationResult res;
      try {
        res = uq::calibrate(cases, c.alpha(), c.delta, c.lambda_grid);
      } catch (const uq::CalibrationInfeasibleError& e) {
        throw uq::CalibrationInfeasibleError(run_name(r, mode) + ": " + e.what(), e.risk_at_hi());
      }
      save_calibration(dir / "calibration.json", res);
      runs[run_name(r, mode)] = {{"lambda_star", res.lambda_star},
                                 {"output", (dir / "calibration.json").string()}};
      say("[calibrate] %s: lambda* = %.2f", run_name(r, mode).c_str(), res.lambda_star);
    }
  }
  update_manifest(c, "calibrate", {{"runs", runs}});
}

void cmd_evaluate(const ExperimentConfig& c, const StageOptions& opt) {
  const Progress say(opt.quiet);
  nlohmann::json runs = nlohmann::json::object();
  for (auto mode : selected_modes(c, opt)) {
    for (double r : c.accelerations) {
      const auto dir = run_dir(c, r, mode);
      if (!fs::exists(dir / "calibration.json"))
        throw uq::DataError("missing calibration result " + (dir / "calibration.json").string());
      require_dir(data_dir(c, r, Split::kTest), "test split");
      const auto cal = load_calibration(dir / "calibration.json");
      const auto model = load_checkpoint(dir / "checkpoint");
      const auto maps_dir = dir / "maps";
      fs::create_directories(maps_dir);

      const auto outcomes = uq::parallel_map<EvalOutcome>(c.n_test, [&](std::size_t i) {
        const auto cd = case_dir(c, r, Split::kTest, i);
        const auto id = case_name(i);
        EvalOutcome out;
        out.access = nlohmann::json::array();

        // The uncertainty map is finalized from x alone before the reference is read.
        const auto x = uq::load_image(cd / "x.t");
        const auto intervals = uq::interval(x, uq::forward(model, x), cal.lambda_star);
        const auto q = uq::uncertainty_map(intervals);
        uq::save_tensor(maps_dir / (id + "_q.t"), q);
        out.access.push_back("q_written");

        const auto y = uq::load_image(cd / "y.t");
        out.access.push_back("y_loaded");

        const auto maps = uq::build_eval_maps(x, y, intervals);
        uq::save_tensor(maps_dir / (id + "_e.t"), maps.e_map);
        const double hi = std::max({uq::grid_max(maps.q_map), uq::grid_max(maps.e_map), 1e-12});
        export_pgm(maps.q_map, maps_dir / (id + "_q.pgm"), 0.0, hi);
        export_pgm(maps.e_map, maps_dir / (id + "_e.pgm"), 0.0, hi);

        out.row.record = uq::compute_metrics(id, x, y, intervals, maps);
        out.row.acceleration = r;
        out.row.mode = mode;
        return out;
      });

      std::vector<MetricsRow> rows;
      std::vector<double> pearsons;
      nlohmann::json access = nlohmann::json::object();
      for (const auto& o : outcomes) {
        rows.push_back(o.row);
        pearsons.push_back(o.row.record.pearson);
        access[o.row.record.case_id] = o.access;
      }
      write_metrics_csv(dir / "metrics.csv", rows);
      write_histogram(dir / "histogram.csv", pearson_histogram(pearsons));
      runs[run_name(r, mode)] = {{"metrics", (dir / "metrics.csv").string()},
                                 {"access_log", access}};
      say("[evaluate] %s: mean pearson %.4f, mean coverage %.4f", run_name(r, mode).c_str(),
          stats_of(pearsons).mean, [&] {
            std::vector<double> cov;
            for (const auto& row : rows) cov.push_back(row.record.coverage);
            return stats_of(cov).mean;
          }());
    }
    write_anomaly_masks(c, mode, say);
  }
  update_manifest(c, "evaluate", {{"runs", runs}});
}

void cmd_report(const ExperimentConfig& c, const StageOptions& opt) {
  const Progress say(opt.quiet);
  struct Group {
    double r;
    uq::HeadMode mode;
    std::vector<MetricsRow> rows;
  };
  std::vector<Group> groups;
  for (double r : c.accelerations)
    for (auto mode : selected_modes(c, opt)) {
      const auto path = run_dir(c, r, mode) / "metrics.csv";
      if (!fs::exists(path)) continue;
      auto rows = read_metrics_csv(path);
      if (!rows.empty()) groups.push_back({r, mode, std::move(rows)});
    }
  if (groups.empty()) throw uq::DataError("no metrics.csv files found under " + (c.output_dir / "runs").string());

  const auto dir = report_dir(c);
  fs::create_directories(dir);
  std::ofstream t1(dir / "table1.csv", std::ios::trunc), t2(dir / "table2.csv", std::ios::trunc),
      hist(dir / "histogram.csv", std::ios::trunc);
  if (!t1 || !t2 || !hist) throw uq::DataError("cannot write report tables in " + dir.string());
  t1 << "acceleration,mode,n,ssim_mean,ssim_std,width_pct_mean,width_pct_std,coverage_mean,coverage_std\n";
  t2 << "acceleration,mode,n,pearson_mean,pearson_std,spearman_mean,spearman_std,"
        "pearson_region_mean,pearson_region_std,spearman_region_mean,spearman_region_std\n";
  hist << "acceleration,mode,bin_lo,bin_hi,count\n";

  auto column = [](const std::vector<MetricsRow>& rows, double uq::MetricsRecord::*field) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& row : rows) v.push_back(row.record.*field);
    return stats_of(v);
  };
  auto pair = [](Stats s) { return format_number(s.mean) + ',' + format_number(s.std); };

  for (const auto& g : groups) {
    const auto label = acceleration_label(g.r) + ',' + uq::to_string(g.mode) + ',' + std::to_string(g.rows.size());
    t1 << label << ',' << pair(column(g.rows, &uq::MetricsRecord::ssim)) << ','
       << pair(column(g.rows, &uq::MetricsRecord::mean_rel_width_pct)) << ','
       << pair(column(g.rows, &uq::MetricsRecord::coverage)) << '\n';
    t2 << label << ',' << pair(column(g.rows, &uq::MetricsRecord::pearson)) << ','
       << pair(column(g.rows, &uq::MetricsRecord::spearman)) << ','
       << pair(column(g.rows, &uq::MetricsRecord::pearson_region)) << ','
       << pair(column(g.rows, &uq::MetricsRecord::spearman_region)) << '\n';
    std::vector<double> pearsons;
    for (const auto& row : g.rows) pearsons.push_back(row.record.pearson);
    const auto counts = pearson_histogram(pearsons);
    const double width = 2.0 / kHistBins;
    for (std::size_t b = 0; b < counts.size(); ++b)
      hist << acceleration_label(g.r) << ',' << uq::to_string(g.mode) << ','
           << format_number(kHistLo + b * width) << ',' << format_number(kHistLo + (b + 1) * width)
           << ',' << counts[b] << '\n';
  }
  say("[report] %zu runs summarized in %s", groups.size(), dir.string().c_str());
  update_manifest(c, "report", {{"outputs", dir.string()}});
}

void run_pipeline(const ExperimentConfig& c, const StageOptions& opt) {
  cmd_generate(c, opt);
  cmd_train(c, opt);
  cmd_calibrate(c, opt);
  cmd_evaluate(c, opt);
  cmd_report(c, opt);
}

}  // namespace uqctl
