#include <gtest/gtest.h>

#include <cmath>

#include "percpool/errors.hpp"
#include "percpool/optim.hpp"

using namespace percpool;

namespace {

Parameter<double> scalar(double value, double lr_factor = 1.0, double wd_factor = 1.0) {
  Parameter<double> p("p", Shape4{1, 1, 1, 1}, lr_factor, wd_factor);
  p.value[0] = value;
  return p;
}

}  // namespace

TEST(Sgd, PlainGradientDescent) {
  auto p = scalar(1.0);
  Sgd<double> opt(SgdOptions{0.0, 0.0});
  opt.add(p);
  p.grad[0] = 0.25;
  opt.step(1.0);
  EXPECT_DOUBLE_EQ(p.value[0], 0.75);
}

TEST(Sgd, MomentumTwoSteps) {
  auto p = scalar(0.0);
  Sgd<double> opt(SgdOptions{0.9, 0.0});
  opt.add(p);
  const double g = 0.5;
  p.grad[0] = g;
  opt.step(1.0);
  opt.step(1.0);
  EXPECT_NEAR(p.value[0], -(g + 1.9 * g), 1e-15);
}

TEST(Sgd, LrFactorScalesStepLinearly) {
  auto a = scalar(2.0, 1.0), b = scalar(2.0, 0.1);
  Sgd<double> oa(SgdOptions{0.9, 1e-2}), ob(SgdOptions{0.9, 1e-2});
  oa.add(a);
  ob.add(b);
  a.grad[0] = b.grad[0] = 0.3;
  oa.step(0.5);
  ob.step(0.5);
  EXPECT_NEAR(2.0 - b.value[0], 0.1 * (2.0 - a.value[0]), 1e-15);
}

TEST(Sgd, WeightDecayIsCoupled) {
  auto p = scalar(2.0, 1.0, 0.5);
  Sgd<double> opt(SgdOptions{0.0, 0.1});
  opt.add(p);
  p.grad[0] = 0.0;
  opt.step(1.0);
  EXPECT_DOUBLE_EQ(p.value[0], 2.0 - 0.5 * 0.1 * 2.0);
}

TEST(Adam, FirstStepMagnitudeIsLearningRate) {
  for (double g : {1e-3, 0.5, -40.0}) {
    auto p = scalar(0.0, 0.1, 0.0);
    Adam<double> opt;
    opt.add(p);
    p.grad[0] = g;
    opt.step(0.01);
    EXPECT_NEAR(std::abs(p.value[0]), 0.01 * 0.1, 1e-7);
    EXPECT_EQ(std::signbit(p.value[0]), g > 0);
  }
}

TEST(Adam, ZeroGradientZeroStateNoChange) {
  auto p = scalar(1.5);
  Adam<double> opt;
  opt.add(p);
  opt.step(0.1);
  EXPECT_EQ(p.value[0], 1.5);
}

TEST(Adam, QuadraticTrajectoryMatchesReferenceRecursion) {
  // minimize 0.5*a*(x - c)^2 for 100 steps
  const double a = 3.0, c = -1.25, lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 1e-3, lrf = 0.5;
  auto p = scalar(2.0, lrf, 1.0);
  Adam<double> opt(AdamOptions{b1, b2, eps, wd});
  opt.add(p);

  long double x = 2.0L, m = 0.0L, v = 0.0L, pow1 = 1.0L, pow2 = 1.0L;
  double max_diff = 0.0;
  for (int t = 1; t <= 100; ++t) {
    p.grad[0] = a * (p.value[0] - c);
    opt.step(lr);

    const long double g = a * (x - c) + wd * x;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    pow1 *= b1;
    pow2 *= b2;
    const long double mhat = m / (1 - pow1);
    const long double vhat = v / (1 - pow2);
    x -= lr * lrf * mhat / (std::sqrt(vhat) + eps);
    max_diff = std::max(max_diff, std::abs(p.value[0] - static_cast<double>(x)));
  }
  EXPECT_LT(max_diff, 1e-10);
}

TEST(Optimizer, ZeroLrFactorFreezesExactly) {
  Parameter<float> p("w", Shape4{1, 1, 2, 2}, 0.0, 1.0);
  for (std::size_t i = 0; i < 4; ++i) p.value[i] = 0.1f * static_cast<float>(i) - 0.17f;
  const auto before = p.value;
  for (int kind = 0; kind < 2; ++kind) {
    std::unique_ptr<Optimizer<float>> opt;
    if (kind == 0) opt = std::make_unique<Sgd<float>>(SgdOptions{0.9, 0.1});
    else opt = std::make_unique<Adam<float>>(AdamOptions{0.9, 0.999, 1e-8, 0.1});
    opt->add(p);
    for (int s = 0; s < 10; ++s) {
      for (std::size_t i = 0; i < 4; ++i) p.grad[i] = static_cast<float>(s + 1) * 0.3f;
      opt->step(0.1);
    }
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.value[i], before[i]);
  }
}

TEST(Optimizer, ZeroWdFactorNeverDecays) {
  Parameter<double> p("w", Shape4{1, 1, 1, 3}, 1.0, 0.0);
  p.value[0] = 1.0;
  p.value[1] = -2.0;
  p.value[2] = 3.0;
  const auto before = p.value;
  Sgd<double> opt(SgdOptions{0.9, 0.5});
  opt.add(p);
  for (int s = 0; s < 5; ++s) opt.step(0.1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(p.value[i], before[i]);
}

TEST(Optimizer, RejectsNegativeFactors) {
  Parameter<double> p("w", Shape4{1, 1, 1, 1}, -0.1, 1.0);
  Sgd<double> opt;
  EXPECT_THROW(opt.add(p), ConfigError);
}

TEST(Optimizer, GradShapeMismatch) {
  Parameter<double> p("w", Shape4{1, 1, 1, 2});
  p.grad = Tensor<double>(Shape4{1, 1, 1, 3});
  Adam<double> opt;
  opt.add(p);
  EXPECT_THROW(opt.step(0.1), ShapeError);
}

TEST(Schedule, StepDecay) {
  Schedule s{1e-3, 0.1, {50, 100}};
  EXPECT_DOUBLE_EQ(schedule_lr(s, 0), 1e-3);
  EXPECT_NEAR(schedule_lr(s, 49), 1e-3, 1e-18);
  EXPECT_NEAR(schedule_lr(s, 50), 1e-4, 1e-18);
  EXPECT_NEAR(schedule_lr(s, 75), 1e-4, 1e-18);
  EXPECT_NEAR(schedule_lr(s, 100), 1e-5, 1e-18);
  Schedule c{0.1, 0.1, {80, 120}};
  EXPECT_NEAR(schedule_lr(c, 160), 1e-3, 1e-16);
  EXPECT_TRUE(c.decays_at(80));
  EXPECT_FALSE(c.decays_at(81));
}

TEST(Schedule, Validation) {
  EXPECT_THROW((Schedule{1e-3, 0.0, {}}).validate(), ConfigError);
  EXPECT_THROW((Schedule{1e-3, 1.5, {}}).validate(), ConfigError);
  EXPECT_THROW((Schedule{1e-3, 0.1, {50, 50}}).validate(), ConfigError);
  EXPECT_NO_THROW((Schedule{1e-3, 1.0, {10, 20}}).validate());
}
