#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "percpool/errors.hpp"
#include "percpool/init.hpp"

using namespace percpool;

TEST(Glorot, BoundAndSampleRange) {
  EXPECT_NEAR(glorot_bound(4, 1), std::sqrt(6.0 / 5.0), 1e-15);
  EXPECT_THROW(glorot_bound(0, 3), ConfigError);
  Rng rng(1);
  std::vector<double> w(20000);
  glorot_uniform<double>(w, 27, 64, rng);
  const double bound = glorot_bound(27, 64);
  double mean = 0, sq = 0;
  for (double v : w) {
    ASSERT_LE(std::abs(v), bound);
    mean += v;
    sq += v * v;
  }
  mean /= w.size();
  // uniform(-a, a) has variance a^2/3
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / w.size(), bound * bound / 3.0, 0.02 * bound * bound);
}

TEST(Glorot, ConvFansIncludeKernelArea) {
  Conv2d<double> conv(Conv2dConfig{3, 8, 3, 3, 1, 1});
  Rng rng(2);
  glorot_init(conv, rng);
  const double bound = std::sqrt(6.0 / (27 + 72));
  double mx = 0;
  for (double v : conv.weight().value.data()) mx = std::max(mx, std::abs(v));
  EXPECT_LE(mx, bound);
  EXPECT_GT(mx, 0.8 * bound);
  for (double v : conv.bias().value.data()) EXPECT_EQ(v, 0.0);
}

TEST(AverageInit, WeightsAreReciprocalArea) {
  PerceptronPoolConfig c;
  c.window_h = 3;
  c.window_w = 2;
  c.stride = 1;
  c.sharing = SharingMode::PerChannel;
  PerceptronPool<double> pool(c);
  pool.bind(Shape4{1, 2, 4, 4});
  Rng rng(3);
  glorot_init(pool, rng);
  average_init(pool);
  for (double v : pool.weight().value.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 6.0);
  for (double v : pool.bias()->value.data()) EXPECT_EQ(v, 0.0);
}

TEST(Pattern, EveryGeneratedPatternClassifies) {
  Rng rng(4);
  for (std::size_t h : {1u, 2u, 3u, 4u}) {
    for (std::size_t w : {1u, 2u, 3u, 5u}) {
      for (int t = 0; t < 50; ++t) {
        SignPattern p = random_pattern(h, w, rng);
        ASSERT_TRUE(classify(p).has_value()) << h << "x" << w;
      }
    }
  }
}

TEST(Pattern, ClassifyKnownGrids) {
  EXPECT_EQ(classify({2, 2, {1, 1, 1, 1}}), PatternClass::AllSame);
  EXPECT_EQ(classify({2, 2, {1, -1, -1, 1}}), PatternClass::Diagonal);
  EXPECT_EQ(classify({2, 2, {-1, 1, 1, -1}}), PatternClass::Diagonal);
  EXPECT_EQ(classify({2, 2, {1, -1, 1, -1}}), PatternClass::XSplit);
  EXPECT_EQ(classify({2, 2, {1, 1, -1, -1}}), PatternClass::YSplit);
  EXPECT_EQ(classify({3, 3, {1, 1, -1, 1, 1, -1, 1, 1, -1}}), PatternClass::XSplit);
  EXPECT_FALSE(classify({3, 3, {1, -1, 1, -1, 1, -1, 1, -1, 1}}).has_value());
}

TEST(Pattern, ClassIsInvariantUnderTransforms) {
  Rng rng(5);
  for (auto cls : {PatternClass::AllSame, PatternClass::Diagonal, PatternClass::XSplit, PatternClass::YSplit}) {
    for (int t = 0; t < 20; ++t) {
      SignPattern p = make_pattern(cls, 3, 3, rng);
      for (auto g : pattern_orbit(p)) {
        auto c = classify(g);
        ASSERT_TRUE(c.has_value());
        // a quarter turn swaps the split axis
        if (cls == PatternClass::XSplit || cls == PatternClass::YSplit) {
          EXPECT_TRUE(*c == PatternClass::XSplit || *c == PatternClass::YSplit);
        } else {
          EXPECT_EQ(*c, cls);
        }
      }
    }
  }
}

TEST(Pattern, TransformsComposeAsExpected) {
  SignPattern p{3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9}};  // values only to track cells
  auto r90 = transform(p, GridTransform::Rot90);
  EXPECT_EQ(transform(r90, GridTransform::Rot270), p);
  EXPECT_EQ(transform(transform(r90, GridTransform::Rot90), GridTransform::Rot180), p);
  EXPECT_EQ(transform(transform(p, GridTransform::MirrorX), GridTransform::MirrorY),
            transform(p, GridTransform::Rot180));
  EXPECT_EQ(r90.signs, (std::vector<int>{7, 4, 1, 8, 5, 2, 9, 6, 3}));
  SignPattern wide{2, 3, {1, 1, 1, 1, 1, 1}};
  EXPECT_THROW(transform(wide, GridTransform::Transpose), ConfigError);
  EXPECT_EQ(transforms_for(2, 3).size(), 4u);
  EXPECT_EQ(transforms_for(3, 3).size(), 8u);
}

TEST(Pattern, SingleInitMagnitudesAndSigns) {
  Rng rng(6);
  std::vector<double> w(4);
  for (int t = 0; t < 200; ++t) {
    SignPattern p = pattern_init_single<double>(w, 2, 2, rng);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_GT(std::abs(w[i]), 0.0);
      EXPECT_LE(std::abs(w[i]), 0.5);
      EXPECT_EQ(w[i] > 0 ? 1 : -1, p.signs[i]);
    }
  }
}

TEST(Pattern, MultiInitUsesDistinctGridsWhilePossible) {
  Rng rng(7);
  // a 3x3 window has 14 classifiable grids: 2 constant, 4 per split axis, 4 diagonal
  for (std::size_t units : {4u, 9u, 14u}) {
    std::vector<double> w(units * 9);
    auto report = pattern_init_multi<double>(w, units, 3, 3, rng);
    ASSERT_EQ(report.grids.size(), units);
    std::set<std::vector<int>> distinct;
    for (const auto& g : report.grids) distinct.insert(g.signs);
    EXPECT_EQ(distinct.size(), units);
    for (std::size_t u = 0; u < units; ++u)
      for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(w[u * 9 + i] > 0 ? 1 : -1, report.grids[u].signs[i]);
  }
}

TEST(Pattern, MultiInitSurvivesOrbitExhaustion) {
  Rng rng(8);
  // a 2x2 window has only 8 classifiable grids; ask for more units than that
  std::vector<double> w(12 * 4);
  auto report = pattern_init_multi<double>(w, 12, 2, 2, rng);
  EXPECT_EQ(report.grids.size(), 12u);
  std::set<std::vector<int>> first;
  for (std::size_t u = 0; u < 8; ++u) first.insert(report.grids[u].signs);
  EXPECT_EQ(first.size(), 8u);
  for (const auto& g : report.grids) EXPECT_TRUE(classify(g).has_value());
}

TEST(Pattern, LayerInitZeroesBias) {
  PerceptronPoolConfig c;
  c.units = 4;
  c.sharing = SharingMode::PerChannel;
  PerceptronPool<float> pool(c);
  pool.bind(Shape4{1, 3, 4, 4});
  for (auto& v : pool.bias()->value.data()) v = 1.0f;
  Rng rng(9);
  init_pool(pool, PoolInit::Pattern, rng);
  for (float v : pool.bias()->value.data()) EXPECT_EQ(v, 0.0f);
  for (float v : pool.weight().value.data()) EXPECT_NE(v, 0.0f);
}

TEST(PoolInitNames, RoundTrip) {
  for (auto s : {PoolInit::Glorot, PoolInit::Average, PoolInit::Pattern})
    EXPECT_EQ(parse_pool_init(to_string(s)), s);
  EXPECT_THROW(parse_pool_init("zeros"), ConfigError);
}
