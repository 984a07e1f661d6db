#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "support.hpp"
#include "uq/conv_model.hpp"
#include "uq/errors.hpp"
#include "uq/grad_check.hpp"
#include "uq/losses.hpp"
#include "uq/trainer.hpp"

using testing_support::random_image;

namespace {

uq::ConvModel zeroed(uq::ConvModel m) {
  for (auto& l : m.layers) {
    std::fill(l.weight.begin(), l.weight.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  }
  return m;
}

uq::Image single(double v) { return uq::Image(1, 1, v); }

}  // namespace

TEST(ConvModel, ChannelPlanPerMode) {
  const auto qr = uq::make_model(uq::HeadMode::kQuantile, 1);
  const auto rm = uq::make_model(uq::HeadMode::kResidual, 1);
  EXPECT_EQ(qr.channel_plan(), (std::vector<std::size_t>{1, 16, 16, 2}));
  EXPECT_EQ(rm.channel_plan(), (std::vector<std::size_t>{1, 16, 16, 1}));
  EXPECT_EQ(qr.parameter_count(), (16 * 9 + 16) + (16 * 16 * 9 + 16) + (2 * 16 * 9 + 2));
  EXPECT_EQ(uq::make_model(uq::HeadMode::kQuantile, 4), uq::make_model(uq::HeadMode::kQuantile, 4));
  EXPECT_NE(uq::make_model(uq::HeadMode::kQuantile, 4), uq::make_model(uq::HeadMode::kQuantile, 5));
}

TEST(ConvModel, HeadModeNames) {
  EXPECT_EQ(uq::to_string(uq::HeadMode::kQuantile), "QR");
  EXPECT_EQ(uq::to_string(uq::HeadMode::kResidual), "ResM");
  EXPECT_EQ(uq::head_mode_from_string("QR"), uq::HeadMode::kQuantile);
  EXPECT_EQ(uq::head_mode_from_string("resm"), uq::HeadMode::kResidual);
  EXPECT_THROW(uq::head_mode_from_string("mc-dropout"), uq::ParameterError);
}

TEST(Forward, ZeroParametersGiveHalfOffsets) {
  const auto m = zeroed(uq::make_model(uq::HeadMode::kQuantile, 2));
  const auto x = random_image(8, 8, 3, 0.1, 1.0);
  const auto f = uq::forward(m, x);
  for (std::size_t p = 0; p < x.size(); ++p) {
    EXPECT_EQ(f.o_l[p], 0.5);
    EXPECT_EQ(f.o_u[p], 0.5);
    EXPECT_DOUBLE_EQ(f.l_tilde[p], 0.5 * x[p]);
    EXPECT_DOUBLE_EQ(f.u_tilde[p], 1.5 * x[p]);
  }
}

TEST(Forward, ShapesRangesAndOrderingOnRandomModels) {
  for (auto mode : {uq::HeadMode::kQuantile, uq::HeadMode::kResidual})
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto m = uq::make_model(mode, seed);
      auto x = random_image(16, 16, seed + 10);
      x(3, 4) = 0.0;
      const auto f = uq::forward(m, x);
      ASSERT_TRUE(f.o_l.same_shape(x));
      ASSERT_TRUE(f.u_tilde.same_shape(x));
      for (std::size_t p = 0; p < x.size(); ++p) {
        EXPECT_GT(f.o_l[p], 0.0);
        EXPECT_LT(f.o_u[p], 1.0);
        EXPECT_LE(f.l_tilde[p], x[p]);
        EXPECT_GE(f.u_tilde[p], x[p]);
      }
      EXPECT_EQ(f.l_tilde(3, 4), 0.0);
      EXPECT_EQ(f.u_tilde(3, 4), 0.0);
      if (mode == uq::HeadMode::kResidual) {
        EXPECT_EQ(f.o_l, f.o_u);
      }
    }
}

TEST(Losses, PinballHandArithmetic) {
  EXPECT_NEAR(uq::pinball_loss(single(1.0), single(2.0), 0.05), 0.05, 1e-15);
  EXPECT_NEAR(uq::pinball_loss(single(2.0), single(1.0), 0.95), 0.05, 1e-15);
  const auto y = random_image(4, 4, 1);
  EXPECT_EQ(uq::pinball_loss(y, y, 0.3), 0.0);
  EXPECT_THROW(uq::pinball_loss(y, y, 1.0), uq::ParameterError);
  EXPECT_EQ(uq::pinball_subgradient(1.0, 2.0, 0.05), -0.05);
  EXPECT_EQ(uq::pinball_subgradient(1.0, 1.0, 0.05), 0.95);
}

TEST(Losses, PinballMinimizedAtEmpiricalQuantile) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> sample(401);
  for (auto& v : sample) v = g(rng);
  const uq::Image y(1, sample.size(), sample);
  auto loss_at = [&](double q) { return uq::pinball_loss(uq::Image(1, sample.size(), q), y, 0.9); };

  auto sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  // Any minimizer of sum rho_0.9 lies between order statistics around the 0.9 quantile.
  double best_q = sorted[0], best = loss_at(best_q);
  for (double q : sorted) {
    const double l = loss_at(q);
    if (l < best) best = l, best_q = q;
  }
  const auto idx = std::lower_bound(sorted.begin(), sorted.end(), best_q) - sorted.begin();
  EXPECT_NEAR(static_cast<double>(idx) / sample.size(), 0.9, 2.0 / sample.size());
  // Convexity along a 1-D scan.
  std::vector<double> scan;
  for (double q = -3; q <= 3; q += 0.05) scan.push_back(loss_at(q));
  for (std::size_t i = 1; i + 1 < scan.size(); ++i) EXPECT_LE(scan[i], 0.5 * (scan[i - 1] + scan[i + 1]) + 1e-12);
}

TEST(Losses, QrTotalIsSumOfHeadsAndMatchesPerPixelOracle) {
  const auto m = uq::make_model(uq::HeadMode::kQuantile, 6);
  const auto x = random_image(8, 8, 7);
  const auto y = random_image(8, 8, 8);
  const auto f = uq::forward(m, x);
  const double total = uq::qr_total_loss(f, y, 0.9);
  EXPECT_NEAR(total, uq::pinball_loss(f.l_tilde, y, 0.05) + uq::pinball_loss(f.u_tilde, y, 0.95), 1e-12);

  double oracle = 0;
  for (std::size_t p = 0; p < 64; ++p) {
    const double rl = y[p] - f.l_tilde[p], ru = y[p] - f.u_tilde[p];
    oracle += std::max(0.05 * rl, -0.95 * rl) + std::max(0.95 * ru, -0.05 * ru);
  }
  EXPECT_NEAR(total, oracle / 64.0, 1e-12);

  uq::QuantileFields exact = f;
  exact.l_tilde = y;
  exact.u_tilde = y;
  EXPECT_EQ(uq::qr_total_loss(exact, y, 0.9), 0.0);
}

TEST(Losses, QrTotalIsPermutationInvariant) {
  const auto m = uq::make_model(uq::HeadMode::kQuantile, 6);
  const auto x = random_image(8, 8, 7), y = random_image(8, 8, 8);
  auto f = uq::forward(m, x);
  const double before = uq::qr_total_loss(f, y, 0.9);
  std::vector<std::size_t> perm(64);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  uq::QuantileFields g = f;
  uq::Image yp = y;
  for (std::size_t i = 0; i < 64; ++i) {
    g.l_tilde[i] = f.l_tilde[perm[i]];
    g.u_tilde[i] = f.u_tilde[perm[i]];
    yp[i] = y[perm[i]];
  }
  EXPECT_NEAR(uq::qr_total_loss(g, yp, 0.9), before, 1e-15);
}

TEST(Losses, ResmArithmeticAndSymmetry) {
  EXPECT_NEAR(uq::resm_loss(single(0.5), single(1.0), single(1.2)), 0.09, 1e-15);
  const auto x = random_image(6, 6, 1), y = random_image(6, 6, 2);
  EXPECT_EQ(uq::resm_loss(uq::abs_diff(x, y), x, y), 0.0);
  const auto r = random_image(6, 6, 3);
  uq::Image flipped(6, 6);
  for (std::size_t p = 0; p < 36; ++p) flipped[p] = 2 * x[p] - y[p];
  EXPECT_NEAR(uq::resm_loss(r, x, y), uq::resm_loss(r, x, flipped), 1e-14);
}

TEST(Backward, LossMatchesModelLossAndHeadDefinitions) {
  const auto x = random_image(8, 8, 1, 0.2, 1.0), y = random_image(8, 8, 2, 0.2, 1.0);
  const auto qr = uq::make_model(uq::HeadMode::kQuantile, 3);
  EXPECT_NEAR(uq::backward(qr, x, y, 0.9).loss, uq::qr_total_loss(uq::forward(qr, x), y, 0.9), 1e-12);
  EXPECT_NEAR(uq::model_loss(qr, x, y, 0.9), uq::backward(qr, x, y, 0.9).loss, 1e-15);
  const auto rm = uq::make_model(uq::HeadMode::kResidual, 3);
  const auto f = uq::forward(rm, x);
  EXPECT_NEAR(uq::backward(rm, x, y, 0.9).loss, uq::resm_loss(uq::residual_estimate(f, x), x, y), 1e-12);
}

TEST(Backward, ResmGradientVanishesAtExactResidual) {
  // Pick y so that |x - y| equals the model's own residual estimate.
  const auto m = uq::make_model(uq::HeadMode::kResidual, 8);
  const auto x = random_image(8, 8, 4, 0.2, 1.0);
  const auto r = uq::residual_estimate(uq::forward(m, x), x);
  uq::Image y(8, 8);
  for (std::size_t p = 0; p < 64; ++p) y[p] = x[p] + (p % 2 ? r[p] : -r[p]);
  const auto lg = uq::backward(m, x, y, 0.9);
  EXPECT_LT(lg.loss, 1e-28);
  for (const auto& layer : lg.grad) {
    for (double g : layer.weight) EXPECT_LT(std::abs(g), 1e-14);
    for (double g : layer.bias) EXPECT_LT(std::abs(g), 1e-14);
  }
}

TEST(GradCheck, TinyModelsBothModes) {
  for (auto mode : {uq::HeadMode::kQuantile, uq::HeadMode::kResidual}) {
    const auto m = uq::make_model(mode, 21, 2);
    EXPECT_EQ(m.channel_plan(), (std::vector<std::size_t>{1, 2, 2, head_count(mode)}));
    const auto x = random_image(8, 8, 1, 0.1, 1.0), y = random_image(8, 8, 2, 0.1, 1.0);
    const auto report = uq::grad_check(m, x, y, 0.9);
    EXPECT_LE(report.max_rel_error, 1e-4) << uq::to_string(mode);
    EXPECT_EQ(report.parameters_checked, m.parameter_count());
  }
}

TEST(GradCheck, CorruptedGradientIsFlagged) {
  const auto m = uq::make_model(uq::HeadMode::kQuantile, 21, 2);
  const auto x = random_image(8, 8, 1, 0.1, 1.0), y = random_image(8, 8, 2, 0.1, 1.0);
  uq::GradientFn corrupted = [](const uq::ConvModel& mm, const uq::Image& xx, const uq::Image& yy, double ct,
                                const uq::Mask* ex) {
    auto lg = uq::backward(mm, xx, yy, ct, ex);
    for (auto& g : lg.grad[1].weight) g *= 1.5;
    return lg;
  };
  EXPECT_GT(uq::grad_check(m, x, y, 0.9, {}, corrupted).max_rel_error, 1e-2);
}

TEST(GradCheck, EpsilonOutOfRangeRejected) {
  const auto m = uq::make_model(uq::HeadMode::kQuantile, 1, 2);
  const auto x = random_image(4, 4, 1);
  uq::GradCheckOptions opt;
  opt.epsilon = 0.5;
  EXPECT_THROW(uq::grad_check(m, x, x, 0.9, opt), uq::ParameterError);
}

TEST(GradCheck, KinkMaskFlagsPixelsNearQuantiles) {
  const auto m = uq::make_model(uq::HeadMode::kQuantile, 2, 2);
  const auto x = random_image(8, 8, 3, 0.2, 1.0);
  auto y = random_image(8, 8, 4, 0.2, 1.0);
  const auto f = uq::forward(m, x);
  y[5] = f.u_tilde[5];
  y[9] = f.l_tilde[9] + 1e-4;
  const auto mask = uq::kink_exclusion_mask(m, x, y, 0.9, 1e-2);
  EXPECT_TRUE(mask[5]);
  EXPECT_TRUE(mask[9]);
  // ResM has no kinks in its squared loss.
  const auto rm = uq::make_model(uq::HeadMode::kResidual, 2, 2);
  const auto none = uq::kink_exclusion_mask(rm, x, y, 0.9, 1e-2);
  for (auto v : none) EXPECT_EQ(v, 0);
}

namespace {

std::vector<uq::TrainingPair> noisy_pairs(std::size_t n, std::uint64_t seed) {
  std::vector<uq::TrainingPair> out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.05);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = random_image(8, 8, seed * 100 + i, 0.2, 1.0);
    uq::Image y(8, 8);
    for (std::size_t p = 0; p < 64; ++p) y[p] = x[p] + g(rng);
    out.push_back({x, y});
  }
  return out;
}

}  // namespace

TEST(Train, ZeroStepsReturnsInitialModel) {
  const auto data = noisy_pairs(3, 1);
  const auto init = uq::make_model(uq::HeadMode::kQuantile, 5, 4);
  uq::TrainConfig cfg;
  cfg.steps = 0;
  const auto res = uq::train(init, data, data, cfg);
  EXPECT_EQ(res.model, init);
  EXPECT_EQ(res.best_step, 0);
}

TEST(Train, SameSeedGivesBitwiseEqualModelsAndLossDecreases) {
  const auto data = noisy_pairs(6, 2);
  const auto val = noisy_pairs(2, 3);
  const auto init = uq::make_model(uq::HeadMode::kQuantile, 5, 4);
  uq::TrainConfig cfg;
  cfg.steps = 150;
  cfg.learning_rate = 3e-3;
  cfg.eval_interval = 50;
  cfg.seed = 9;
  const auto a = uq::train(init, data, val, cfg);
  const auto b = uq::train(init, data, val, cfg);
  EXPECT_EQ(a.model, b.model);
  ASSERT_GE(a.log.size(), 2u);
  EXPECT_LT(a.log.back().best_val_loss, a.log.front().val_loss);
  for (std::size_t i = 1; i < a.log.size(); ++i) EXPECT_LE(a.log[i].best_val_loss, a.log[i - 1].best_val_loss);
}

TEST(Train, RejectsModeMismatchAndEmptyData) {
  const auto data = noisy_pairs(2, 1);
  uq::TrainConfig cfg;
  cfg.steps = 1;
  cfg.mode = uq::HeadMode::kResidual;
  EXPECT_THROW(uq::train(uq::make_model(uq::HeadMode::kQuantile, 1, 2), data, data, cfg), uq::ParameterError);
  cfg.mode = uq::HeadMode::kQuantile;
  EXPECT_THROW(uq::train(uq::make_model(uq::HeadMode::kQuantile, 1, 2), {}, data, cfg), uq::DataError);
}

TEST(Train, NonFiniteLossRaisesTrainingError) {
  auto data = noisy_pairs(2, 1);
  data[0].y[0] = std::numeric_limits<double>::quiet_NaN();
  uq::TrainConfig cfg;
  cfg.steps = 5;
  cfg.eval_interval = 1;
  EXPECT_THROW(uq::train(uq::make_model(uq::HeadMode::kResidual, 1, 2), data, data,
                         [&] { auto c = cfg; c.mode = uq::HeadMode::kResidual; return c; }()),
               uq::TrainingError);
}
