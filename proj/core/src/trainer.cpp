#include "uq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace uq {
namespace {

class Adam {
 public:
  Adam(const ConvModel& model, const TrainConfig& c)
      : m_(zero_gradients(model)), v_(zero_gradients(model)), c_(c) {}

  void step(ConvModel& model, const Gradients& g) {
    ++t_;
    const double bc1 = 1.0 - std::pow(c_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(c_.beta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      update(model.layers[l].weight, g[l].weight, m_[l].weight, v_[l].weight, bc1, bc2);
      update(model.layers[l].bias, g[l].bias, m_[l].bias, v_[l].bias, bc1, bc2);
    }
  }

 private:
  void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
              std::vector<double>& v, double bc1, double bc2) const {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c_.beta1 * m[i] + (1.0 - c_.beta1) * g[i];
      v[i] = c_.beta2 * v[i] + (1.0 - c_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= c_.learning_rate * mhat / (std::sqrt(vhat) + c_.adam_epsilon);
    }
  }

  Gradients m_;
  Gradients v_;
  const TrainConfig& c_;
  std::int64_t t_ = 0;
};

void accumulate(Gradients& into, const Gradients& g, double scale) {
  for (std::size_t l = 0; l < into.size(); ++l) {
    for (std::size_t i = 0; i < into[l].weight.size(); ++i) into[l].weight[i] += scale * g[l].weight[i];
    for (std::size_t i = 0; i < into[l].bias.size(); ++i) into[l].bias[i] += scale * g[l].bias[i];
  }
}

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.coverage_target > 0.0 && c.coverage_target < 1.0))
    throw ParameterError("coverage_target must lie in (0, 1)");
  if (!(c.learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (c.steps < 0) throw ParameterError("steps must be non-negative");
  if (c.batch == 0) throw ParameterError("batch must be positive");
  if (c.eval_interval <= 0) throw ParameterError("eval_interval must be positive");
}

double mean_loss(const ConvModel& model, std::span<const TrainingPair> pairs, double coverage_target) {
  if (pairs.empty()) throw DataError("mean_loss over an empty set");
  double sum = 0.0;
  for (const auto& p : pairs) sum += model_loss(model, p.x, p.y, coverage_target);
  return sum / static_cast<double>(pairs.size());
}

TrainResult train(const ConvModel& initial, std::span<const TrainingPair> train_set,
                  std::span<const TrainingPair> val_set, const TrainConfig& config) {
  validate(config);
  if (train_set.empty()) throw DataError("training set is empty");
  if (initial.mode != config.mode)
    throw ParameterError("model mode " + to_string(initial.mode) + " does not match config mode " +
                         to_string(config.mode));
  const auto selection = val_set.empty() ? train_set : val_set;

  TrainResult result;
  ConvModel model = initial;
  result.model = initial;
  double best = mean_loss(model, selection, config.coverage_target);
  if (!std::isfinite(best)) throw TrainingError("initial validation loss is not finite", 0);
  result.log.push_back({0, std::numeric_limits<double>::quiet_NaN(), best, best});

  Adam adam(model, config);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  double window_loss = 0.0;
  std::int64_t window_steps = 0;
  for (std::int64_t step = 1; step <= config.steps; ++step) {
    Gradients g = zero_gradients(model);
    double step_loss = 0.0;
    const double scale = 1.0 / static_cast<double>(config.batch);
    for (std::size_t b = 0; b < config.batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const auto& pair = train_set[order[cursor++]];
      LossAndGradient lg;
      try {
        lg = backward(model, pair.x, pair.y, config.coverage_target);
      } catch (const NumericError& e) {
        throw TrainingError(std::string("training diverged: ") + e.what(), step);
      }
      step_loss += scale * lg.loss;
      accumulate(g, lg.grad, scale);
    }
    if (!std::isfinite(step_loss)) throw TrainingError("training loss is not finite", step);
    adam.step(model, g);
    window_loss += step_loss;
    ++window_steps;

    if (step % config.eval_interval == 0 || step == config.steps) {
      double val;
      try {
        val = mean_loss(model, selection, config.coverage_target);
      } catch (const NumericError& e) {
        throw TrainingError(std::string("validation diverged: ") + e.what(), step);
      }
      if (!std::isfinite(val)) throw TrainingError("validation loss is not finite", step);
      if (val < best) {
        best = val;
        result.model = model;
        result.best_step = step;
      }
      result.log.push_back({step, window_loss / static_cast<double>(window_steps), val, best});
      window_loss = 0.0;
      window_steps = 0;
    }
  }
  return result;
}

}  // namespace uq
