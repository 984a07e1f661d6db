#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "uq/conv_model.hpp"

namespace uq {

struct TrainConfig {
  double coverage_target = 0.90;
  double learning_rate = 3e-4;
  std::int64_t steps = 0;
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  HeadMode mode = HeadMode::kQuantile;
  std::int64_t eval_interval = 100;  // validation loss cadence, in steps
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

void validate(const TrainConfig& config);

struct TrainingPair {
  Image x;  // reconstruction
  Image y;  // reference
};

struct TrainLogEntry {
  std::int64_t step = 0;
  double train_loss = 0.0;  // mean over the steps since the previous entry
  double val_loss = 0.0;
  double best_val_loss = 0.0;
};

struct TrainResult {
  ConvModel model;  // parameters with the lowest validation loss
  std::int64_t best_step = 0;
  std::vector<TrainLogEntry> log;
};

/// Mean model loss over a set of pairs.
double mean_loss(const ConvModel& model, std::span<const TrainingPair> pairs, double coverage_target);

/// Adam on the mode's loss with seeded epoch shuffling. An empty validation
/// set falls back to the training set for checkpoint selection.
TrainResult train(const ConvModel& initial, std::span<const TrainingPair> train_set,
                  std::span<const TrainingPair> val_set, const TrainConfig& config);

}  // namespace uq
